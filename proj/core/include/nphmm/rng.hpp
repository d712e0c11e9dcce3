#pragma once

#include <cstdint>

namespace nphmm {

// Counter-based generator: each (master seed, stream id) pair names an
// independent stream, and draw i of a stream is a pure hash of (key, i).
// Replications can therefore run on any thread schedule without sharing
// state or changing their output.
class CounterRng {
  public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    // uniform on [0,1) with 53-bit resolution
    double next_unit();

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // stable stream key for a replication index under a master seed
    static std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t index);

    // SplitMix64 finalizer; stateless
    static std::uint64_t mix(std::uint64_t z);

  private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace nphmm
