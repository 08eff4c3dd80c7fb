#pragma once

#include <memory>
#include <span>
#include <vector>

namespace polyem {

/// Parameters of the logarithmic modulus rho(r) = (log(e/r))^{-beta} and of
/// the truncated sawtooth series built from it.
struct ModulusSpec {
    double beta = 3.0;  ///< must exceed 2 so that rho^{1/2} is a Dini function
    int levels = 800;   ///< truncation level K of the sawtooth series

    /// Throws std::invalid_argument on beta <= 2 or levels < 1.
    void validate() const;
};

/// rho(r) = (log(e/r))^{-beta} on (0, 1]. Throws std::domain_error outside.
double rho(double r, const ModulusSpec& spec);

/// 1-periodic triangle wave: distance from v to the nearest integer.
double sawtooth(double v);

/// a_k = rho(2^{-k}) - rho(2^{-(k+1)}), k >= 1.
///
/// Evaluated from the log form 1 + k log 2 so that large k neither underflows
/// 2^{-k} nor loses the difference to cancellation.
double level_weight(int k, const ModulusSpec& spec);

/// Truncated series g_K(x) = sum_{k=1}^{K} a_k * sawtooth(2^k x).
///
/// Weights are tabulated once at construction. Terms are added in ascending k.
/// Once 2^k x is an integer every later term is exactly zero, so the loop
/// stops there; the result is bit-identical to the full sum.
class SawtoothSeries {
public:
    explicit SawtoothSeries(const ModulusSpec& spec);

    double operator()(double x) const;

    const ModulusSpec& spec() const { return spec_; }
    std::span<const double> weights() const { return weights_; }

    /// sum_k 2^k a_k, a global Lipschitz bound of the truncated series.
    /// Diagnostic only; it is far from tight.
    double lipschitz_bound() const;

    /// rho(1/2)/2, the uniform bound 0 <= g_K <= sup_bound().
    double sup_bound() const;

private:
    ModulusSpec spec_;
    std::vector<double> weights_;  // weights_[k-1] = a_k
};

/// One-shot evaluation of g_K(x); builds the weight table on every call.
double g_series(double x, const ModulusSpec& spec);

/// Singular time factor f(t) = t^{-1/2} (log(e/t))^{-1} on (0, 1].
double time_factor(double t);

/// psi(z) = sign(z) |z|^{0.4} / (1 + |z|^{0.4}), with sign(0) = 0.
double psi(double z);

struct SlowVariationRow {
    double upsilon;
    double r;
    double ratio;      // rho(upsilon * r) / rho(r)
    double deviation;  // |ratio - 1|
};

struct SlowVariationReport {
    std::vector<SlowVariationRow> rows;
    /// Largest deviation among the rows at the smallest sampled r.
    double max_deviation_at_smallest_r = 0.0;
    /// Deviations are non-increasing as r decreases, for every upsilon.
    bool monotone = true;
};

/// Tabulates rho(upsilon r)/rho(r) for every (upsilon, r) pair.
/// Throws std::domain_error if upsilon <= 0 or upsilon * r > 1.
SlowVariationReport check_slow_variation(const ModulusSpec& spec,
                                         std::span<const double> upsilons,
                                         std::span<const double> radii);

struct DiniRow {
    double eps;
    double partial;       // quadrature of int_eps^1 rho(r)^a / r dr
    double closed_form;   // same integral from the antiderivative
    double tail;          // int_0^eps, closed form (infinite if divergent)
    double extrapolated;  // partial + tail
    double increment;     // partial minus the previous row's partial
};

struct DiniReport {
    double exponent = 1.0;
    std::vector<DiniRow> rows;
    /// exponent * beta > 1, i.e. the integral over (0, 1) is finite.
    bool convergent = false;
    /// Value of the full integral when convergent, otherwise +inf.
    double limit = 0.0;
};

/// Partial Dini integrals int_eps^1 rho(r)^exponent / r dr for each eps.
///
/// The quadrature runs in s = log(1/r), where the integrand is (1 + s)^{-a beta},
/// so eps down to the smallest normal double is reachable.
DiniReport check_dini_integral(const ModulusSpec& spec, double exponent,
                               std::span<const double> eps_list);

}  // namespace polyem
