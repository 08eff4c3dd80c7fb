#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyem/models.hpp"
#include "polyem/modulus.hpp"
#include "polyem/scheme.hpp"

namespace polyem {

/// One Monte Carlo strong-error experiment.
struct ExperimentConfig {
    std::string problem = "A";
    std::vector<std::size_t> n_list{64, 128, 256, 512, 1024, 2048, 4096, 8192};
    std::size_t n_ref = std::size_t{1} << 18;
    std::size_t samples = 5000;
    std::vector<double> p_list{2.0, 4.0};
    std::uint64_t seed = 20240601;
    ModulusSpec modulus{};
    unsigned workers = 1;
    /// LS slopes use the finest ls_window levels; empty means all levels.
    std::optional<std::size_t> ls_window;
    Scheme scheme = Scheme::polygonal;
    double quadrature_tol = kDefaultWeightTolerance;

    /// Throws std::invalid_argument. Grid sizes must be powers of two dividing
    /// n_ref in strictly increasing order; n = n_ref itself is accepted.
    void validate() const;
};

struct ErrorRow {
    std::size_t n = 0;
    double p = 2.0;
    double err_end = 0.0;
    double se_end = 0.0;  // jackknife standard error
    double err_sup = 0.0;
    double se_sup = 0.0;
};

/// Rows ordered by n, then by p in configuration order.
struct ErrorTable {
    std::vector<ErrorRow> rows;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::size_t n_ref = 0;
    double tolerance_used = 0.0;

    std::vector<double> moments() const;
    std::vector<std::size_t> levels() const;
};

/// A sample hit a non-finite state; the message names the sample index.
class SampleAbortError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Couples every level in config.n_list to a reference solve on n_ref using
/// one fine Wiener path per sample, and returns L^p endpoint and supremum
/// errors. The result is independent of config.workers.
ErrorTable run_experiment(const ExperimentConfig& config);

/// Same protocol with an explicitly supplied problem (config.problem ignored).
ErrorTable run_experiment(const ExperimentConfig& config, const SdeProblem& problem);

struct RateRow {
    std::size_t n_coarse = 0;
    std::size_t n_fine = 0;
    double p = 2.0;
    std::optional<double> rate_end;  // absent when either error is zero
    std::optional<double> rate_sup;
};

struct SlopeRow {
    double p = 2.0;
    std::optional<double> slope_end;
    std::optional<double> slope_sup;
};

struct RateReport {
    std::vector<RateRow> rates;
    std::vector<SlopeRow> slopes;
};

/// log2(E(n) / E(2n)) for consecutive dyadic levels, per p.
std::vector<RateRow> two_level_rates(const ErrorTable& table);

/// Negated OLS slope of log2(err) on log2(n). Throws std::invalid_argument with
/// fewer than two points or a non-positive entry.
double ls_slope(std::span<const double> n, std::span<const double> err);

/// LS slopes per p over the finest `window` levels (all levels when empty).
/// A slope is absent when fewer than two positive errors remain.
std::vector<SlopeRow> ls_slopes(const ErrorTable& table, std::optional<std::size_t> window);

RateReport rate_report(const ErrorTable& table, std::optional<std::size_t> window);

struct LowerBoundBands {
    double slope_min = 0.42;
    double slope_max = 0.60;
    double max_scaled_ratio = 2.0;
};

struct LowerBoundReport {
    std::vector<std::size_t> n;
    std::vector<double> err_end;  // E_2^end(n)
    std::vector<double> scaled;   // sqrt(n) * E_2^end(n)
    double slope = 0.0;
    double scaled_ratio = 0.0;    // max(scaled) / min(scaled)
    bool degenerate = false;      // all errors vanish: the scheme is exact
    bool pass = false;
    std::string summary;
};

/// Optimality check of order 1/2 with classical EM on the driftless problem
/// sigma(x) = 2 + tanh(x). Uses config with problem and scheme overridden.
LowerBoundReport lower_bound_check(const ExperimentConfig& config,
                                   const LowerBoundBands& bands = {});

/// Same check on an explicit classical-EM-compatible problem.
LowerBoundReport lower_bound_check(const ExperimentConfig& config, const SdeProblem& problem,
                                   const LowerBoundBands& bands = {});

struct MomentReport {
    std::size_t n = 0;
    std::size_t draws = 0;
    double mean = 0.0;       // empirical E[((dW)^2 - 1/n)^2]
    double std_error = 0.0;
    double target = 0.0;     // 2 / n^2
    bool pass = false;       // |mean - target| <= 4 std_error
};

/// Empirical check of E[((dW)^2 - 1/n)^2] = 2 n^{-2} for dW ~ N(0, 1/n).
MomentReport moment_identity_check(std::size_t n, std::size_t draws, std::uint64_t seed);

}  // namespace polyem
