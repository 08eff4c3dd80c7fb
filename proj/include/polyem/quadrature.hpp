#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyem {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double simpson_step(const F& fn, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0 || !(lm > a && m > lm && rm > m && b > rm)) {
        throw QuadratureError("adaptive Simpson did not converge on [" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              "]; tolerance too small");
    }
    return simpson_step(fn, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(fn, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive interval-halving Simpson rule with Richardson correction.
///
/// The absolute tolerance is split evenly between the two halves at every
/// refinement. Throws QuadratureError once max_depth halvings are exhausted.
template <class F>
double adaptive_simpson(const F& fn, double a, double b, double tol,
                        int max_depth = 60) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("adaptive_simpson: tolerance must be positive");
    }
    if (a == b) {
        return 0.0;
    }
    const double fa = fn(a);
    const double fb = fn(b);
    const double m = 0.5 * (a + b);
    const double fm = fn(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(fn, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

/// Per-interval and cumulative integrals of the singular time factor on the
/// uniform grid t_k = k/n.
struct WeightTable {
    std::size_t n = 0;
    std::vector<double> weights;     // weights[k] = int_{k/n}^{(k+1)/n} f
    std::vector<double> cumulative;  // cumulative[j] = int_0^{j/n} f, size n+1
    double tolerance_used = 0.0;
};

inline constexpr double kDefaultWeightTolerance = 1e-12;

/// int_a^b f(s) ds for the singular time factor, 0 <= a < b <= 1.
///
/// For a = 0 the integral is taken in u = sqrt(t), where f dt becomes
/// 2 / (1 - 2 log u) du, and then in s = -log u, where it becomes
/// 2 e^{-s} / (1 + 2 s) ds on [log(1/sqrt b), inf): a smooth, exponentially
/// decaying integrand. The s-range is cut where the remaining tail is below
/// tol * 1e-3. Intervals away from 0 are integrated directly.
double time_factor_integral(double a, double b, double tol = kDefaultWeightTolerance);

/// Weight table of the singular time factor on n uniform steps.
/// Throws std::invalid_argument for n = 0 and QuadratureError on
/// non-convergence.
WeightTable build_weight_table(std::size_t n, double tol = kDefaultWeightTolerance);

/// Weight table of an arbitrary bounded integrand without any substitution.
/// Exists for testing the generic weight path.
WeightTable build_weight_table(std::size_t n, double tol,
                               const std::function<double(double)>& integrand);

/// cumulative[j]; throws std::out_of_range for j > n.
double cumulative_at(const WeightTable& table, std::size_t j);

struct SquareIntegralRow {
    double eps;
    double partial;       // quadrature of int_eps^1 f(t)^2 dt
    double tail;          // int_0^eps f^2 = 1 / log(e/eps), closed form
    double extrapolated;  // partial + tail, should equal 1
};

/// Square-integrability check of the time factor: the quadrature is taken in
/// t over dyadic pieces [eps 2^j, eps 2^{j+1}] and completed by the closed-form
/// tail near 0.
std::vector<SquareIntegralRow> check_time_factor_square_integral(
    const std::vector<double>& eps_list);

/// Rows "k weight cumulative" for k = 0..n-1 (cumulative at the right node).
void write_weight_table(const WeightTable& table, std::ostream& out);

}  // namespace polyem
