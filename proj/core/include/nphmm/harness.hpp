#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nphmm/density_estimation.hpp"
#include "nphmm/io.hpp"
#include "nphmm/model.hpp"

namespace nphmm {

// ---- model zoo ------------------------------------------------------------

// +1 on the left half of [0,1), -1 on the right half
GridFunction half_split(int level);

// 1 + amplitude * half_split; |amplitude| <= 1
DensityGrid step_density(int level, double amplitude);

// Density with exact smoothness s under the level-sup coefficient norm:
// father 1, mother (j,k) = amplitude * 2^(-j(s+1/2)) * (-1)^k for every
// representable level. Caller keeps amplitude small enough for positivity.
DensityGrid rough_density(int level, double s, double amplitude);

// ---- experiment configuration ----------------------------------------------

enum class SweepEstimator { q, smooth, rough, direction };
enum class DirectionSource { oracle, split3n, file };

struct ExperimentConfig {
    ModelParams model;
    std::vector<std::size_t> n_values;  // ascending
    int reps = 100;
    std::uint64_t seed = 0;
    SweepEstimator estimator = SweepEstimator::q;

    int max_mother_level = 3;   // direction index-set depth
    int start_level = 0;        // tree start level
    double tau = 0.0;           // <= 0: derived from the model contrast
    double gamma = 0.0;         // <= 0: default_gamma(model, gamma_scale)
    double gamma_scale = 1.0;   // multiplier on the default threshold shape
    double t_check = 0.0;       // <= 0: sup bound of the model densities
    double s0 = 0.5, s1 = 0.5;  // smoothness indices reported for diagnostics

    DirectionSource direction = DirectionSource::split3n;
    std::string direction_file;

    std::string out;
    int threads = 1;
    bool timing = false;  // real wall_time breaks byte-identical reruns

    // descriptors echoed into CSV preambles so output files are self-describing
    std::string f0_desc = "uniform";
    std::string f1_desc = "uniform";
};

// Flat key-value config. Unknown keys are errors naming the line. CLI-style
// overrides (same keys) are applied after the file.
ExperimentConfig load_config(const std::vector<KeyValueLine>& file_entries,
                             const std::vector<KeyValueLine>& overrides);
ExperimentConfig load_config_file(const std::string& path,
                                  const std::vector<KeyValueLine>& overrides = {});

// threshold shape from the concentration bounds:
// scale * sqrt(L) * max(sqrt(L/gap), 1/gap) with L = sup bound of the model
double default_gamma(const ModelParams& theta, double scale);
double default_tau(const ModelParams& theta);
double default_t_check(const ModelParams& theta);

// ---- sweep -----------------------------------------------------------------

struct RiskRecord {
    std::size_t n = 0;
    double delta = 0.0;    // min(p, q)
    double eps = 0.0;      // |1 - p - q|
    double zeta = 0.0;     // ||f0 - f1||
    int rep = 0;
    std::uint64_t seed = 0;  // per-replication seed; reproduces the row alone
    std::string estimator;   // "q", "smooth:f0", "rough:f1", "direction", ...
    double loss_raw = 0.0;
    double loss_final = 0.0;  // clamped (q) or truncated (densities) loss
    std::string flags = "-";  // '|'-separated degeneracy flags
    double wall_time = 0.0;   // 0 unless timing was enabled
};

std::vector<RiskRecord> run_sweep(const ExperimentConfig& config);

// CSV with a '#'-commented config echo, a mandatory header row, and one row
// per record in RiskRecord field order; floats carry 17 significant digits.
void write_csv(std::ostream& os, const ExperimentConfig& config,
               const std::vector<RiskRecord>& records);
std::string csv_string(const ExperimentConfig& config,
                       const std::vector<RiskRecord>& records);
std::vector<RiskRecord> read_csv(std::istream& is);
std::vector<RiskRecord> read_csv_file(const std::string& path);

// ---- rate fitting ----------------------------------------------------------

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points = 0;  // distinct n values entering the fit
};

// OLS of log(mean loss) on log(n) over records whose estimator field starts
// with estimator_prefix; use_raw selects the loss column.
RateFit fit_rate(const std::vector<RiskRecord>& records, const std::string& estimator_prefix,
                 bool use_raw);
RateFit fit_rate_csv(const std::string& path, const std::string& estimator_prefix,
                     bool use_raw);

// ---- oracle self-checks ------------------------------------------------------

struct OracleReport {
    struct Check {
        std::string name;
        double deviation = 0.0;
        double tolerance = 0.0;
        bool pass = false;
        std::string note;
    };
    std::vector<Check> checks;
    std::vector<std::string> notes;  // degeneracy annotations
    bool all_pass = false;
};

struct OracleCheckOptions {
    // test hook: offset added to the closed-form third moment so the
    // comparison machinery itself can be proven able to fail
    double m3_corruption = 0.0;
    // full joint-density cube validation is skipped above this resolution
    int max_cube_level = 8;
};

OracleReport oracle_check(const ModelParams& theta, const OracleCheckOptions& options = {});
void print_report(std::ostream& os, const OracleReport& report);

}  // namespace nphmm
