#include "nphmm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nphmm/rng.hpp"

namespace nphmm {

GridSampler::GridSampler(const DensityGrid& density) {
    require_density(density, 1e-10);
    const std::size_t cells = density.cells();
    cell_width = 1.0 / static_cast<double>(cells);
    cumulative.resize(cells);
    double acc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        acc += density.values[k] * cell_width;
        cumulative[k] = acc;
    }
    cumulative.back() = 1.0;  // absorb the last-ulp rounding of the running sum
}

double GridSampler::draw(double u) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k =
        static_cast<std::size_t>(std::distance(cumulative.begin(), it));
    const double lo = k == 0 ? 0.0 : cumulative[k - 1];
    const double mass = cumulative[k] - lo;
    // exact inverse CDF: the remainder of the same uniform positions the
    // draw inside the chosen cell
    const double frac = mass > 0.0 ? (u - lo) / mass : 0.0;
    double y = (static_cast<double>(k) + frac) * cell_width;
    if (y >= 1.0) y = std::nextafter(1.0, 0.0);
    return y;
}

SamplePath sample_path(const ModelParams& theta, std::size_t n,
                       std::uint64_t master_seed, std::uint64_t stream_id) {
    if (n < 1) throw std::invalid_argument("sample_path: need n >= 1");
    validate_model(theta);

    const GridSampler sampler0(theta.f0);
    const GridSampler sampler1(theta.f1);
    const auto [pi0, pi1] = stationary_distribution(theta);
    (void)pi1;

    CounterRng rng(master_seed, stream_id);
    SamplePath path;
    path.master_seed = master_seed;
    path.stream_id = stream_id;
    path.hidden.resize(n);
    path.observed.resize(n);

    std::uint8_t state = rng.next_unit() < pi0 ? 0 : 1;
    for (std::size_t t = 0; t < n; ++t) {
        path.hidden[t] = state;
        const double u = rng.next_unit();
        path.observed[t] = state == 0 ? sampler0.draw(u) : sampler1.draw(u);
        const double v = rng.next_unit();
        if (state == 0)
            state = v < theta.p ? 1 : 0;
        else
            state = v < theta.q ? 0 : 1;
    }
    return path;
}

std::pair<SamplePath, SamplePath> split_3n(const ModelParams& theta, std::size_t n,
                                           std::uint64_t master_seed,
                                           std::uint64_t stream_id) {
    SamplePath full = sample_path(theta, 3 * n, master_seed, stream_id);
    auto segment = [&full](std::size_t offset, std::size_t count) {
        SamplePath seg;
        seg.master_seed = full.master_seed;
        seg.stream_id = full.stream_id;
        seg.hidden.assign(full.hidden.begin() + static_cast<std::ptrdiff_t>(offset),
                          full.hidden.begin() + static_cast<std::ptrdiff_t>(offset + count));
        seg.observed.assign(
            full.observed.begin() + static_cast<std::ptrdiff_t>(offset),
            full.observed.begin() + static_cast<std::ptrdiff_t>(offset + count));
        return seg;
    };
    return {segment(0, n), segment(2 * n, n)};
}

}  // namespace nphmm
