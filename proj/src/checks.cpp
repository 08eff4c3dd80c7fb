#include "polyem/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "polyem/harness.hpp"
#include "polyem/paths.hpp"
#include "polyem/quadrature.hpp"

namespace polyem {
namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult bound_check(std::string name, double worst, double limit) {
    return {std::move(name), worst <= limit, "max deviation " + fmt(worst) + " (limit " + fmt(limit) + ")"};
}

}  // namespace

std::vector<CheckResult> modulus_property_suite(const ModulusSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<CheckResult> out;

    {
        double worst = 0.0;
        for (const auto& row : check_time_factor_square_integral({1e-2, 1e-4, 1e-8, 1e-12})) {
            worst = std::max(worst, std::abs(row.extrapolated - 1.0));
        }
        out.push_back(bound_check("time factor L2 norm: int_0^1 f^2 = 1", worst, 1e-8));
    }
    {
        const std::vector<double> eps{1e-1, 1e-4, 1e-16, 1e-64, 1e-256};
        const DiniReport report = check_dini_integral(spec, 0.5, eps);
        double worst = 0.0;
        for (const auto& row : report.rows) {
            worst = std::max(worst, std::abs(row.extrapolated - report.limit));
            worst = std::max(worst, std::abs(row.partial - row.closed_form));
        }
        out.push_back(bound_check("Dini integral of rho^{1/2}/r -> " + fmt(report.limit), worst, 1e-8));
    }
    {
        const WeightTable one = build_weight_table(1);
        const WeightTable two = build_weight_table(2);
        const double gap = std::abs(two.cumulative[2] - one.cumulative[1]);
        out.push_back(bound_check("weight additivity w0(n=1) = w0 + w1 (n=2)", gap, 2e-12));
    }
    {
        double worst = 0.0;
        WeightTable coarse = build_weight_table(64);
        for (std::size_t n = 128; n <= 32768; n *= 2) {
            WeightTable fine = build_weight_table(n);
            for (std::size_t k = 0; k < coarse.n; ++k) {
                worst = std::max(worst, std::abs(fine.weights[2 * k] + fine.weights[2 * k + 1] -
                                                 coarse.weights[k]));
                worst = std::max(worst, std::abs(fine.cumulative[2 * (k + 1)] -
                                                 coarse.cumulative[k + 1]));
            }
            coarse = std::move(fine);
        }
        out.push_back(bound_check("weight nesting across levels 64..32768", worst, 1e-10));
    }
    {
        const ModulusSpec cubic{3.0, 800};
        bool ok = rho(1.0, cubic) == 1.0 &&
                  std::abs(rho(std::exp(-1.0), cubic) - 0.125) <= 1e-15 &&
                  sawtooth(0.0) == 0.0 && sawtooth(0.25) == 0.25 && sawtooth(0.75) == 0.25 &&
                  psi(0.0) == 0.0 && psi(1.0) == 0.5 && psi(-1.0) == -0.5 &&
                  time_factor(1.0) == 1.0 && g_series(0.0, cubic) == 0.0;
        const double r_half = std::pow(1.0 + std::numbers::ln2, -3.0);
        ok = ok && std::abs(rho(0.5, cubic) - r_half) <= 1e-15;
        out.push_back({"sawtooth / rho / psi identities", ok, ok ? "all hold" : "identity violated"});
    }
    {
        ModulusSpec low = spec;
        low.levels = std::min(spec.levels, 400);
        ModulusSpec high = spec;
        high.levels = std::max(spec.levels, 800);
        const SawtoothSeries g_low(low);
        const SawtoothSeries g_high(high);
        const double limit = 0.5 * std::pow(1.0 + (low.levels + 1) * std::numbers::ln2, -spec.beta);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-4.0, 4.0);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double x = dist(rng);
            worst = std::max(worst, std::abs(g_high(x) - g_low(x)));
        }
        out.push_back(bound_check("truncation tail |g_" + std::to_string(high.levels) + " - g_" +
                                      std::to_string(low.levels) + "| <= rho(2^-" +
                                      std::to_string(low.levels + 1) + ")/2",
                                  worst, limit));
    }
    return out;
}

std::vector<CheckResult> path_property_suite(std::uint64_t seed, std::size_t draws) {
    std::vector<CheckResult> out;
    for (const std::size_t n : {std::size_t{1}, std::size_t{64}, std::size_t{8192}}) {
        const MomentReport m = moment_identity_check(n, draws, seed);
        out.push_back({"moment identity n=" + std::to_string(n), m.pass,
                       "mean " + fmt(m.mean) + ", target " + fmt(m.target) + ", 4 se " +
                           fmt(4.0 * m.std_error)});
    }
    {
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 8; ++s) {
            const PathBundle bundle = sample_fine_increments(seed, s, 1u << 15, 2);
            const auto w = partial_sums(bundle);
            for (std::size_t n = 1; n <= bundle.n_ref; n *= 2) {
                const auto coarse = aggregate(bundle, n);
                for (std::size_t i = 0; i < bundle.dim; ++i) {
                    double total = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        total += coarse[j * bundle.dim + i];
                    }
                    worst = std::max(worst, std::abs(total - w[bundle.n_ref * bundle.dim + i]));
                }
            }
        }
        out.push_back(bound_check("coupling exactness: aggregated W_1 equals fine W_1", worst, 1e-12));
    }
    {
        const PathBundle a = sample_fine_increments(seed, 3, 4096, 2);
        const PathBundle b = sample_fine_increments(seed, 3, 4096, 2);
        const bool same = a.increments == b.increments;
        out.push_back({"bundle regeneration is bit-identical", same,
                       same ? "identical" : "bundles differ"});
    }
    return out;
}

bool print_checks(const std::vector<CheckResult>& results, std::ostream& out) {
    bool all = true;
    for (const auto& r : results) {
        out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
        all = all && r.pass;
    }
    return all;
}

}  // namespace polyem
