#include "nphmm/rng.hpp"

namespace nphmm {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterRng::derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    return mix(mix(master_seed) ^ (index * kGolden + 1));
}

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      key_(derive_stream(master_seed, stream_id)) {}

std::uint64_t CounterRng::next_u64() { return mix(key_ + (counter_++) * kGolden); }

double CounterRng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace nphmm
