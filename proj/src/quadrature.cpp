#include "polyem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "polyem/modulus.hpp"

namespace polyem {
namespace {

void check_grid_size(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("weight table: grid size must be >= 1");
    }
}

void fill_cumulative(WeightTable& table) {
    table.cumulative.assign(table.n + 1, 0.0);
    for (std::size_t k = 0; k < table.n; ++k) {
        table.cumulative[k + 1] = table.cumulative[k] + table.weights[k];
    }
}

}  // namespace

double time_factor_integral(double a, double b, double tol) {
    if (!(a >= 0.0 && a < b && b <= 1.0)) {
        throw std::domain_error("time_factor_integral: need 0 <= a < b <= 1");
    }
    if (a > 0.0) {
        return adaptive_simpson([](double t) { return time_factor(t); }, a, b, tol);
    }
    // t = u^2, u = e^{-s}: f(t) dt = 2 e^{-s} / (1 + 2 s) ds on [s0, inf)
    const auto integrand = [](double s) { return 2.0 * std::exp(-s) / (1.0 + 2.0 * s); };
    const double s0 = -0.5 * std::log(b);
    double s1 = s0 + 1.0;
    while (integrand(s1) > 1e-3 * tol) {
        s1 += 1.0;
    }
    return adaptive_simpson(integrand, s0, s1, tol);
}

WeightTable build_weight_table(std::size_t n, double tol) {
    check_grid_size(n);
    WeightTable table;
    table.n = n;
    table.tolerance_used = tol;
    table.weights.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = static_cast<double>(k) / nn;
        const double b = static_cast<double>(k + 1) / nn;
        table.weights[k] = time_factor_integral(a, b, tol);
    }
    fill_cumulative(table);
    return table;
}

WeightTable build_weight_table(std::size_t n, double tol,
                               const std::function<double(double)>& integrand) {
    check_grid_size(n);
    WeightTable table;
    table.n = n;
    table.tolerance_used = tol;
    table.weights.resize(n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        table.weights[k] = adaptive_simpson(integrand, static_cast<double>(k) / nn,
                                            static_cast<double>(k + 1) / nn, tol);
    }
    fill_cumulative(table);
    return table;
}

double cumulative_at(const WeightTable& table, std::size_t j) {
    if (j > table.n) {
        throw std::out_of_range("cumulative_at: index " + std::to_string(j) +
                                " outside [0, " + std::to_string(table.n) + "]");
    }
    return table.cumulative[j];
}

std::vector<SquareIntegralRow> check_time_factor_square_integral(
    const std::vector<double>& eps_list) {
    const auto square = [](double t) {
        const double f = time_factor(t);
        return f * f;
    };
    std::vector<SquareIntegralRow> rows;
    for (const double eps : eps_list) {
        if (!(eps > 0.0 && eps <= 1.0)) {
            throw std::domain_error("square integral check: eps must lie in (0, 1]");
        }
        double partial = 0.0;
        double lo = eps;
        while (lo < 1.0) {
            const double hi = std::min(2.0 * lo, 1.0);
            partial += adaptive_simpson(square, lo, hi, 1e-14);
            lo = hi;
        }
        const double tail = 1.0 / (1.0 - std::log(eps));
        rows.push_back({eps, partial, tail, partial + tail});
    }
    return rows;
}

void write_weight_table(const WeightTable& table, std::ostream& out) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out.precision(17);
    out << "# k weight cumulative (n=" << table.n << ", tol=" << table.tolerance_used << ")\n";
    for (std::size_t k = 0; k < table.n; ++k) {
        out << k << ' ' << table.weights[k] << ' ' << table.cumulative[k + 1] << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace polyem
