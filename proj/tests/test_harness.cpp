#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polyem/harness.hpp"
#include "polyem/models.hpp"
#include "table_a.hpp"

using namespace polyem;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.n_list = {16, 32, 64, 128};
    c.n_ref = 1024;
    c.samples = 40;
    c.seed = 11;
    return c;
}

const ErrorRow& find_row(const ErrorTable& t, std::size_t n, double p) {
    for (const auto& r : t.rows) {
        if (r.n == n && r.p == p) {
            return r;
        }
    }
    throw std::logic_error("row not found");
}

}  // namespace

TEST_CASE("config validation") {
    auto c = small_config();
    CHECK_NOTHROW(c.validate());
    c.n_list = {16, 100};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("grid sizes must be powers of two dividing n_ref"),
                         std::invalid_argument);
    c = small_config();
    c.n_list = {2048};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.n_list = {64, 32};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.p_list = {0.5};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.samples = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("table layout and metadata") {
    const auto t = run_experiment(small_config());
    CHECK(t.rows.size() == 8);
    CHECK(t.rows[0].n == 16);
    CHECK(t.rows[0].p == 2.0);
    CHECK(t.rows[1].p == 4.0);
    CHECK(t.levels() == std::vector<std::size_t>{16, 32, 64, 128});
    CHECK(t.moments() == std::vector<double>{2.0, 4.0});
    CHECK(t.seed == 11);
    CHECK(t.samples == 40);
    CHECK(t.n_ref == 1024);
    CHECK(t.tolerance_used > 0.0);
    for (const auto& r : t.rows) {
        CHECK(r.err_end > 0.0);
        CHECK(r.err_sup >= r.err_end);
        CHECK(r.se_end > 0.0);
        CHECK(r.se_sup > 0.0);
    }
    for (std::size_t n : t.levels()) {
        CHECK(find_row(t, n, 4.0).err_end >= find_row(t, n, 2.0).err_end);
    }
}

TEST_CASE("n equal to n_ref gives zero error") {
    auto c = small_config();
    c.n_list = {1024};
    c.samples = 5;
    const auto t = run_experiment(c);
    for (const auto& r : t.rows) {
        CHECK(r.err_end == 0.0);
        CHECK(r.err_sup == 0.0);
    }
}

TEST_CASE("driftless constant diffusion has zero strong error") {
    auto c = small_config();
    c.n_list = {1, 4, 16, 64, 256};
    for (std::size_t dim : {1u, 2u}) {
        const auto t = run_experiment(c, constant_diffusion_problem(dim, 1.0));
        for (const auto& r : t.rows) {
            CHECK(r.err_end <= 1e-12);
            CHECK(r.err_sup <= 1e-12);
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    auto c = small_config();
    c.problem = "B";
    const auto one = run_experiment(c);
    c.workers = 3;
    const auto three = run_experiment(c);
    c.workers = 8;
    const auto eight = run_experiment(c);
    REQUIRE(one.rows.size() == three.rows.size());
    for (std::size_t i = 0; i < one.rows.size(); ++i) {
        CHECK(one.rows[i].err_end == three.rows[i].err_end);
        CHECK(one.rows[i].err_sup == three.rows[i].err_sup);
        CHECK(one.rows[i].se_sup == three.rows[i].se_sup);
        CHECK(one.rows[i].err_end == eight.rows[i].err_end);
        CHECK(one.rows[i].err_sup == eight.rows[i].err_sup);
    }
}

TEST_CASE("errors decrease from coarse to fine") {
    auto c = small_config();
    c.samples = 200;
    const auto t = run_experiment(c);
    for (const double p : {2.0, 4.0}) {
        const auto& coarse = find_row(t, 16, p);
        const auto& fine = find_row(t, 128, p);
        CHECK(coarse.err_end - fine.err_end > 2.0 * (coarse.se_end + fine.se_end));
        CHECK(coarse.err_sup - fine.err_sup > 2.0 * (coarse.se_sup + fine.se_sup));
    }
}

TEST_CASE("a failing sample aborts the run") {
    SdeProblem blowup = constant_diffusion_problem(1, 1.0);
    blowup.regular_drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = 1e300 * (1.0 + std::abs(x[0]));
    };
    auto c = small_config();
    c.samples = 3;
    CHECK_THROWS_WITH_AS(run_experiment(c, blowup), doctest::Contains("sample 0"), SampleAbortError);
}

TEST_CASE("two-level rates") {
    ErrorTable t;
    t.rows = {{64, 2, 4e-2, 0, 4e-2, 0}, {128, 2, 2e-2, 0, 4e-2, 0}, {256, 2, 0.0, 0, 4e-2, 0}};
    const auto rates = two_level_rates(t);
    REQUIRE(rates.size() == 2);
    CHECK(rates[0].n_coarse == 64);
    CHECK(rates[0].n_fine == 128);
    CHECK(*rates[0].rate_end == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*rates[0].rate_sup == 0.0);
    CHECK_FALSE(rates[1].rate_end.has_value());

    ErrorTable pair;
    pair.rows = {{1024, 2, 9.27e-3, 0, 1, 0}, {2048, 2, 6.53e-3, 0, 1, 0}};
    CHECK(std::abs(*two_level_rates(pair)[0].rate_end - 0.51) < 0.005);

    // non-adjacent levels are normalized per doubling
    ErrorTable gap;
    gap.rows = {{64, 2, 4e-2, 0, 1, 0}, {256, 2, 2e-2, 0, 1, 0}};
    CHECK(*two_level_rates(gap)[0].rate_end == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("least squares slopes") {
    std::vector<double> n;
    std::vector<double> e;
    for (double k = 64; k <= 8192; k *= 2) {
        n.push_back(k);
        e.push_back(3.0 * std::pow(k, -0.5));
    }
    CHECK(std::abs(ls_slope(n, e) - 0.5) < 1e-12);
    std::vector<double> flat(n.size(), 0.01);
    CHECK(std::abs(ls_slope(n, flat)) < 1e-12);

    // invariant under rescaling the errors
    std::vector<double> scaled = e;
    for (auto& v : scaled) {
        v *= 1e-3;
    }
    CHECK(ls_slope(n, scaled) == doctest::Approx(ls_slope(n, e)).epsilon(1e-12));

    CHECK_THROWS_AS(ls_slope(std::vector<double>{64}, std::vector<double>{0.1}), std::invalid_argument);
    CHECK_THROWS_AS(ls_slope(std::vector<double>{64, 128}, std::vector<double>{0.1, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ls_slope(std::vector<double>{64, 64}, std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("reference example A table") {
    const auto t = table_a::error_table();
    const auto rates = two_level_rates(t);
    CHECK(rates.size() == 14);
    for (const auto& col : table_a::columns) {
        std::size_t i = 0;
        for (const auto& r : rates) {
            if (r.p != col.p) {
                continue;
            }
            const double got = col.sup ? *r.rate_sup : *r.rate_end;
            CHECK(std::abs(got - col.rate[i]) <= 0.01);
            ++i;
        }
        CHECK(i == 7);
    }
    const auto slopes = ls_slopes(t, 4);
    REQUIRE(slopes.size() == 2);
    for (const auto& col : table_a::columns) {
        const auto& s = col.p == 2.0 ? slopes[0] : slopes[1];
        const double got = col.sup ? *s.slope_sup : *s.slope_end;
        CHECK(std::abs(got - col.ls_slope) <= 0.005);
    }
    const auto all = ls_slopes(t, std::nullopt);
    CHECK(std::abs(*all[0].slope_end - 0.502) < 0.005);
    const auto report = rate_report(t, 4);
    CHECK(report.rates.size() == 14);
    CHECK(report.slopes.size() == 2);
}

TEST_CASE("lower-bound check") {
    ExperimentConfig c;
    c.n_list = {16, 32, 64, 128};
    c.n_ref = 2048;
    c.samples = 400;
    c.seed = 3;
    const auto report = lower_bound_check(c);
    CHECK_FALSE(report.degenerate);
    CHECK(report.n == c.n_list);
    REQUIRE(report.scaled.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(report.scaled[i] == doctest::Approx(std::sqrt(double(report.n[i])) * report.err_end[i]));
    }
    CHECK(report.slope > 0.35);
    CHECK(report.slope < 0.65);
    CHECK(report.scaled_ratio >= 1.0);
    CHECK(report.pass == (report.slope >= 0.42 && report.slope <= 0.60 && report.scaled_ratio <= 2.0));

    // control: a constant diffusion is integrated exactly, so there is no rate to test
    const auto exact = lower_bound_check(c, constant_diffusion_problem(1, 1.0));
    CHECK(exact.degenerate);
    CHECK_FALSE(exact.pass);
    CHECK(exact.summary.find("degenerate: scheme exact") != std::string::npos);

    CHECK_THROWS_AS(lower_bound_check(c, make_problem("A", {})), std::invalid_argument);
}

TEST_CASE("increment moment identity") {
    for (std::size_t n : {1u, 64u, 8192u}) {
        const auto r = moment_identity_check(n, 200000, 17);
        CHECK(r.pass);
        CHECK(r.target == doctest::Approx(2.0 / (double(n) * double(n))).epsilon(1e-15));
        CHECK(r.draws == 200000);
        CHECK(std::abs(r.mean - r.target) <= 4.0 * r.std_error);
    }
    CHECK_THROWS_AS(moment_identity_check(0, 10, 1), std::invalid_argument);
}
