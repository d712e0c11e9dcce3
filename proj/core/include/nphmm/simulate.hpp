#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "nphmm/model.hpp"

namespace nphmm {

struct SamplePath {
    std::vector<std::uint8_t> hidden;
    std::vector<double> observed;  // values in [0,1)
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    std::size_t size() const { return observed.size(); }
};

// Stationary draw: the first hidden state follows the invariant distribution,
// transitions follow the chain, and each observation is the exact inverse-CDF
// transform of one uniform under its state's grid density. Deterministic in
// (theta, n, master_seed, stream_id) regardless of thread schedule.
SamplePath sample_path(const ModelParams& theta, std::size_t n,
                       std::uint64_t master_seed, std::uint64_t stream_id = 0);

// One contiguous stationary path of length 3n; returns the first n
// observations and the last n, discarding the middle n as a decorrelation gap.
std::pair<SamplePath, SamplePath> split_3n(const ModelParams& theta, std::size_t n,
                                           std::uint64_t master_seed,
                                           std::uint64_t stream_id = 0);

// Precomputed inverse-CDF table for one grid density.
class GridSampler {
  public:
    explicit GridSampler(const DensityGrid& density);
    double draw(double u) const;  // u in [0,1)

  private:
    std::vector<double> cumulative;  // cumulative[k] = mass of cells 0..k
    double cell_width;
};

}  // namespace nphmm
