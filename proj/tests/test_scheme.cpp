#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "polyem/models.hpp"
#include "polyem/paths.hpp"
#include "polyem/quadrature.hpp"
#include "polyem/scheme.hpp"

using namespace polyem;

TEST_CASE("polygonal step") {
    const auto lb = lower_bound_problem();
    const std::vector<double> x{0.7};
    const std::vector<double> zero{0.0};
    CHECK(polygonal_step(lb, x, 0.3, 1.0 / 64, zero) == x);

    // 50-digit reference: 0.4 + 0.01 g(0.4) + (1 + 0.5 tanh 0.4) 0.05
    const auto a = example_a({});
    const auto next = polygonal_step(a, std::vector<double>{0.4}, 0.01, 1.0 / 64, std::vector<double>{0.05});
    CHECK(std::abs(next[0] - 0.46001291319433037272) < 1e-15);

    CHECK_THROWS_AS(polygonal_step(a, std::vector<double>{0.4, 0.1}, 0.01, 0.1, zero), std::invalid_argument);
}

TEST_CASE("classical EM step") {
    const auto lb = lower_bound_problem();
    CHECK(classical_em_step(lb, std::vector<double>{0.0}, 1.0 / 64, std::vector<double>{0.1})[0] ==
          doctest::Approx(0.2).epsilon(1e-15));
    CHECK(classical_em_step(lb, std::vector<double>{1.3}, 1.0 / 64, std::vector<double>{0.0})[0] == 1.3);
    const auto a = example_a({});
    try {
        classical_em_step(a, std::vector<double>{0.0}, 0.1, std::vector<double>{0.1});
        FAIL("expected rejection");
    } catch (const std::invalid_argument& ex) {
        CHECK(std::string(ex.what()).find("classical EM not defined for singular drift") != std::string::npos);
    }
    const auto w = build_weight_table(4);
    CHECK_THROWS_AS(solve_on_grid(a, 4, std::vector<double>(4, 0.0), w, Scheme::classical_em),
                    std::invalid_argument);
}

TEST_CASE("driftless constant diffusion is exact") {
    const auto c = constant_diffusion_problem(2, 0.8);
    const auto bundle = sample_fine_increments(1, 0, 1024, 2);
    const auto fine_w = build_weight_table(1024);
    const auto path = partial_sums(bundle);
    const auto ref = reference_solution(c, bundle, fine_w);
    for (std::size_t m = 0; m <= 1024; ++m) {
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(std::abs(ref.state(m)[i] - 0.8 * path[m * 2 + i]) < 1e-12);
        }
    }
    for (std::size_t n : {1u, 16u, 256u}) {
        const auto coarse = solve_on_grid(c, n, aggregate(bundle, n), build_weight_table(n));
        const std::size_t block = 1024 / n;
        for (std::size_t k = 0; k <= n; ++k) {
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(std::abs(coarse.state(k)[i] - ref.state(k * block)[i]) < 1e-12);
            }
        }
        const auto ext = extend_to_fine(c, coarse, path, fine_w);
        for (std::size_t m = 0; m <= 1024; ++m) {
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(std::abs(ext[m * 2 + i] - 0.8 * path[m * 2 + i]) < 1e-12);
            }
        }
    }
    const auto sigma_one = constant_diffusion_problem(1, 1.0);
    const auto b1 = sample_fine_increments(2, 0, 256, 1);
    const auto r1 = reference_solution(sigma_one, b1, build_weight_table(256));
    const auto w1 = partial_sums(b1);
    for (std::size_t m = 0; m <= 256; ++m) {
        CHECK(r1.state(m)[0] == w1[m]);
    }
}

TEST_CASE("solve_on_grid matches a straight-line recursion") {
    const ModulusSpec spec;
    const auto a = example_a(spec);
    const auto bundle = sample_fine_increments(123, 4, 4096, 1);
    const auto inc = aggregate(bundle, 64);
    const auto table = build_weight_table(64);
    const auto traj = solve_on_grid(a, 64, inc, table);
    CHECK(traj.states.size() == 65);
    CHECK(traj.states[0] == 0.0);

    const SawtoothSeries g(spec);
    double x = 0.0;
    for (std::size_t k = 0; k < 64; ++k) {
        x = x + table.weights[k] * g(x) + 0.0 / 64.0 + (1.0 + 0.5 * std::tanh(x)) * inc[k];
    }
    CHECK(std::abs(traj.states[64] - x) < 1e-12);
    CHECK_THROWS_AS(solve_on_grid(a, 32, aggregate(bundle, 32), table), std::invalid_argument);
    CHECK_THROWS_AS(solve_on_grid(a, 64, aggregate(bundle, 32), table), std::invalid_argument);
}

TEST_CASE("extension to the fine grid") {
    const auto b = example_b({});
    const auto bundle = sample_fine_increments(77, 2, 2048, 2);
    const auto fine_w = build_weight_table(2048);
    const auto path = partial_sums(bundle);
    const auto ref = reference_solution(b, bundle, fine_w);

    // n = n_ref: identical to the trajectory
    const auto ext_ref = extend_to_fine(b, ref, path, fine_w);
    CHECK(ext_ref == ref.states);

    const std::size_t n = 64;
    const std::size_t block = 2048 / n;
    const auto table = build_weight_table(n);
    const auto coarse = solve_on_grid(b, n, aggregate(bundle, n), table);
    const auto ext = extend_to_fine(b, coarse, bundle, fine_w);
    CHECK(ext.size() == 2049 * 2);
    for (std::size_t k = 0; k <= n; ++k) {
        CHECK(ext[k * block * 2] == coarse.state(k)[0]);
        CHECK(ext[k * block * 2 + 1] == coarse.state(k)[1]);
    }
    // the interpolation formula evaluated at t_{k+1} reproduces the step
    for (std::size_t k = 0; k < n; ++k) {
        const auto x = coarse.state(k);
        const auto parts = eval_drift_parts(b, x);
        const auto s = eval_sigma(b, x);
        const std::size_t base = k * block;
        const std::size_t end = base + block;
        const double dF = fine_w.cumulative[end] - fine_w.cumulative[base];
        const double dt = 1.0 / n;
        for (std::size_t i = 0; i < 2; ++i) {
            const double dW0 = path[end * 2] - path[base * 2];
            const double dW1 = path[end * 2 + 1] - path[base * 2 + 1];
            const double value = x[i] + dF * parts.singular[i] + dt * parts.regular[i] +
                                 s[i * 2] * dW0 + s[i * 2 + 1] * dW1;
            CHECK(std::abs(value - coarse.state(k + 1)[i]) < 1e-10);
        }
        // and interior nodes follow the same formula
        const std::size_t mid = base + block / 2;
        const double dFm = fine_w.cumulative[mid] - fine_w.cumulative[base];
        const double dtm = static_cast<double>(block / 2) / 2048.0;
        const double dW0 = path[mid * 2] - path[base * 2];
        const double dW1 = path[mid * 2 + 1] - path[base * 2 + 1];
        const double v0 = x[0] + dFm * parts.singular[0] + dtm * parts.regular[0] + s[0] * dW0 + s[1] * dW1;
        CHECK(std::abs(ext[mid * 2] - v0) < 1e-14);
    }
    CHECK(ext[2048 * 2] == coarse.state(n)[0]);

    const Trajectory odd{3, 2, std::vector<double>(8, 0.0)};
    CHECK_THROWS_AS(extend_to_fine(b, odd, path, fine_w), std::invalid_argument);
}

TEST_CASE("reference solution determinism and lower-bound second moment") {
    const auto lb = lower_bound_problem();
    const auto fine_w = build_weight_table(256);
    const auto bundle = sample_fine_increments(5, 0, 256, 1);
    CHECK(reference_solution(lb, bundle, fine_w, Scheme::classical_em).states ==
          reference_solution(lb, bundle, fine_w, Scheme::classical_em).states);
    CHECK(reference_solution(lb, bundle, fine_w, Scheme::classical_em).states ==
          reference_solution(lb, bundle, fine_w, Scheme::polygonal).states);

    // E[X_1^2] = int_0^1 E[sigma(X_s)^2] ds lies in [1, 9]
    const std::size_t m = 10000;
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto b = sample_fine_increments(5, i, 256, 1);
        const double x = reference_solution(lb, b, fine_w, Scheme::classical_em).states.back();
        s += x * x;
        s2 += x * x * x * x;
    }
    const double mean = s / m;
    const double se = std::sqrt((s2 / m - mean * mean) / m);
    CHECK(mean - 4 * se > 1.0);
    CHECK(mean + 4 * se < 9.0);
}

TEST_CASE("non-finite states abort") {
    SdeProblem blowup = constant_diffusion_problem(1, 1.0);
    blowup.regular_drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = 1e300 * (1.0 + std::abs(x[0]));
    };
    const auto table = build_weight_table(8);
    CHECK_THROWS_AS(solve_on_grid(blowup, 8, std::vector<double>(8, 0.0), table), NonFiniteStateError);
}

TEST_CASE("trajectory dump") {
    const Trajectory t{2, 1, {0.0, 0.5, 0.25}};
    std::ostringstream out;
    write_trajectory(t, out);
    CHECK(out.str() == "0 0\n0.5 0.5\n1 0.25\n");
}
