#include "polyem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "polyem/paths.hpp"
#include "polyem/quadrature.hpp"

namespace polyem {
namespace {

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() == 1) {
        return std::abs(a[0] - b[0]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

// (mean of d^p)^{1/p} with its leave-one-out jackknife standard error.
Estimate lp_norm(const std::vector<double>& dist, double p) {
    const std::size_t m = dist.size();
    std::vector<double> powers(m);
    double sum = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        powers[s] = std::pow(dist[s], p);
        sum += powers[s];
    }
    Estimate est;
    est.value = std::pow(sum / static_cast<double>(m), 1.0 / p);
    if (m < 2) {
        return est;
    }
    const double mm = static_cast<double>(m);
    std::vector<double> loo(m);
    double loo_mean = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        loo[s] = std::pow(std::max(sum - powers[s], 0.0) / (mm - 1.0), 1.0 / p);
        loo_mean += loo[s];
    }
    loo_mean /= mm;
    double ss = 0.0;
    for (const double v : loo) {
        ss += (v - loo_mean) * (v - loo_mean);
    }
    est.se = std::sqrt((mm - 1.0) / mm * ss);
    return est;
}

struct SampleResult {
    std::vector<double> end;  // per level
    std::vector<double> sup;
};

}  // namespace

void ExperimentConfig::validate() const {
    modulus.validate();
    if (!is_power_of_two(n_ref)) {
        throw std::invalid_argument("n_ref must be a power of two, got " + std::to_string(n_ref));
    }
    if (n_list.empty()) {
        throw std::invalid_argument("n_list must not be empty");
    }
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const std::size_t n = n_list[i];
        if (!is_power_of_two(n) || n > n_ref || n_ref % n != 0) {
            throw std::invalid_argument("grid sizes must be powers of two dividing n_ref (got " +
                                        std::to_string(n) + ")");
        }
        if (i > 0 && n <= n_list[i - 1]) {
            throw std::invalid_argument("n_list must be strictly increasing");
        }
    }
    if (samples < 1) {
        throw std::invalid_argument("samples must be positive");
    }
    if (p_list.empty()) {
        throw std::invalid_argument("p_list must not be empty");
    }
    for (const double p : p_list) {
        if (!(p >= 1.0) || !std::isfinite(p)) {
            throw std::invalid_argument("moment orders must be finite and >= 1");
        }
    }
    if (ls_window && *ls_window < 2) {
        throw std::invalid_argument("ls_window must be at least 2");
    }
    if (!(quadrature_tol > 0.0)) {
        throw std::invalid_argument("quadrature tolerance must be positive");
    }
}

std::vector<double> ErrorTable::moments() const {
    std::vector<double> out;
    for (const auto& row : rows) {
        if (std::find(out.begin(), out.end(), row.p) == out.end()) {
            out.push_back(row.p);
        }
    }
    return out;
}

std::vector<std::size_t> ErrorTable::levels() const {
    std::vector<std::size_t> out;
    for (const auto& row : rows) {
        if (std::find(out.begin(), out.end(), row.n) == out.end()) {
            out.push_back(row.n);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ErrorTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    ModulusSpec spec = config.modulus;
    return run_experiment(config, make_problem(config.problem, spec));
}

ErrorTable run_experiment(const ExperimentConfig& config, const SdeProblem& problem) {
    config.validate();
    if (config.scheme == Scheme::classical_em && !problem.classical_em_allowed) {
        throw std::invalid_argument("problem " + problem.name +
                                    ": classical EM not defined for singular drift");
    }
    const std::size_t levels = config.n_list.size();
    const std::size_t d = problem.dim;

    // All quadrature happens before any path is simulated.
    const WeightTable fine_table = build_weight_table(config.n_ref, config.quadrature_tol);
    std::vector<WeightTable> tables;
    tables.reserve(levels);
    for (const std::size_t n : config.n_list) {
        tables.push_back(n == config.n_ref ? fine_table
                                           : build_weight_table(n, config.quadrature_tol));
    }

    std::vector<double> end_dist(config.samples * levels, 0.0);
    std::vector<double> sup_dist(config.samples * levels, 0.0);

    const auto run_sample = [&](std::size_t s) {
        const PathBundle bundle = sample_fine_increments(config.seed, s, config.n_ref, d);
        const std::vector<double> path = partial_sums(bundle);
        const Trajectory ref = reference_solution(problem, bundle, fine_table, config.scheme);
        for (std::size_t l = 0; l < levels; ++l) {
            const std::size_t n = config.n_list[l];
            const std::vector<double> inc = aggregate(bundle, n);
            const Trajectory coarse = solve_on_grid(problem, n, inc, tables[l], config.scheme);
            end_dist[s * levels + l] = distance(ref.state(config.n_ref), coarse.state(n));
            const std::vector<double> ext = extend_to_fine(problem, coarse, path, fine_table);
            double worst = 0.0;
            for (std::size_t m = 0; m <= config.n_ref; ++m) {
                const std::span<const double> e(ext.data() + m * d, d);
                worst = std::max(worst, distance(ref.state(m), e));
            }
            sup_dist[s * levels + l] = worst;
        }
    };

    const unsigned workers =
        static_cast<unsigned>(std::clamp<std::size_t>(config.workers, 1, config.samples));
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::size_t failed_sample = std::numeric_limits<std::size_t>::max();
    std::string failure;

    const auto worker = [&] {
        for (;;) {
            const std::size_t s = next.fetch_add(1);
            if (s >= config.samples) {
                return;
            }
            try {
                run_sample(s);
            } catch (const std::exception& ex) {
                std::lock_guard lock(failure_mutex);
                if (s < failed_sample) {
                    failed_sample = s;
                    failure = ex.what();
                }
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (failed_sample != std::numeric_limits<std::size_t>::max()) {
        throw SampleAbortError("sample " + std::to_string(failed_sample) + " aborted: " + failure);
    }

    ErrorTable table;
    table.seed = config.seed;
    table.samples = config.samples;
    table.n_ref = config.n_ref;
    table.tolerance_used = fine_table.tolerance_used;
    std::vector<double> end_l(config.samples);
    std::vector<double> sup_l(config.samples);
    for (std::size_t l = 0; l < levels; ++l) {
        for (std::size_t s = 0; s < config.samples; ++s) {
            end_l[s] = end_dist[s * levels + l];
            sup_l[s] = sup_dist[s * levels + l];
        }
        for (const double p : config.p_list) {
            const Estimate e = lp_norm(end_l, p);
            const Estimate u = lp_norm(sup_l, p);
            table.rows.push_back({config.n_list[l], p, e.value, e.se, u.value, u.se});
        }
    }
    return table;
}

namespace {

// Rows of one moment order, sorted by n.
std::vector<ErrorRow> rows_for(const ErrorTable& table, double p) {
    std::vector<ErrorRow> out;
    for (const auto& row : table.rows) {
        if (row.p == p) {
            out.push_back(row);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ErrorRow& a, const ErrorRow& b) { return a.n < b.n; });
    return out;
}

std::optional<double> rate(double e_coarse, double e_fine, std::size_t n_coarse,
                           std::size_t n_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
        return std::nullopt;
    }
    const double levels = std::log2(static_cast<double>(n_fine) / static_cast<double>(n_coarse));
    return (std::log2(e_coarse) - std::log2(e_fine)) / levels;
}

std::optional<double> slope_or_absent(const std::vector<double>& n, const std::vector<double>& e) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (e[i] > 0.0) {
            xs.push_back(n[i]);
            ys.push_back(e[i]);
        }
    }
    if (xs.size() < 2) {
        return std::nullopt;
    }
    return ls_slope(xs, ys);
}

}  // namespace

std::vector<RateRow> two_level_rates(const ErrorTable& table) {
    std::vector<RateRow> out;
    for (const double p : table.moments()) {
        const auto rows = rows_for(table, p);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& c = rows[i - 1];
            const auto& f = rows[i];
            out.push_back({c.n, f.n, p, rate(c.err_end, f.err_end, c.n, f.n),
                           rate(c.err_sup, f.err_sup, c.n, f.n)});
        }
    }
    return out;
}

double ls_slope(std::span<const double> n, std::span<const double> err) {
    if (n.size() != err.size() || n.size() < 2) {
        throw std::invalid_argument("ls_slope: need at least two (n, error) points");
    }
    const std::size_t m = n.size();
    double xbar = 0.0;
    double ybar = 0.0;
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(n[i] > 0.0) || !(err[i] > 0.0)) {
            throw std::invalid_argument("ls_slope: grid sizes and errors must be positive");
        }
        x[i] = std::log2(n[i]);
        y[i] = std::log2(err[i]);
        xbar += x[i];
        ybar += y[i];
    }
    xbar /= static_cast<double>(m);
    ybar /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxy += (x[i] - xbar) * (y[i] - ybar);
        sxx += (x[i] - xbar) * (x[i] - xbar);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("ls_slope: grid sizes must not all coincide");
    }
    return -sxy / sxx;
}

std::vector<SlopeRow> ls_slopes(const ErrorTable& table, std::optional<std::size_t> window) {
    std::vector<SlopeRow> out;
    for (const double p : table.moments()) {
        auto rows = rows_for(table, p);
        if (window && *window < rows.size()) {
            rows.erase(rows.begin(), rows.end() - static_cast<std::ptrdiff_t>(*window));
        }
        std::vector<double> n, e_end, e_sup;
        for (const auto& row : rows) {
            n.push_back(static_cast<double>(row.n));
            e_end.push_back(row.err_end);
            e_sup.push_back(row.err_sup);
        }
        out.push_back({p, slope_or_absent(n, e_end), slope_or_absent(n, e_sup)});
    }
    return out;
}

RateReport rate_report(const ErrorTable& table, std::optional<std::size_t> window) {
    return {two_level_rates(table), ls_slopes(table, window)};
}

LowerBoundReport lower_bound_check(const ExperimentConfig& config, const LowerBoundBands& bands) {
    return lower_bound_check(config, lower_bound_problem(), bands);
}

LowerBoundReport lower_bound_check(const ExperimentConfig& config, const SdeProblem& problem,
                                   const LowerBoundBands& bands) {
    ExperimentConfig cfg = config;
    cfg.problem = problem.name;
    cfg.scheme = Scheme::classical_em;
    cfg.p_list = {2.0};
    const ErrorTable table = run_experiment(cfg, problem);

    LowerBoundReport report;
    for (const auto& row : table.rows) {
        report.n.push_back(row.n);
        report.err_end.push_back(row.err_end);
        report.scaled.push_back(std::sqrt(static_cast<double>(row.n)) * row.err_end);
    }
    report.degenerate = std::all_of(report.err_end.begin(), report.err_end.end(),
                                    [](double e) { return e <= 1e-12; });
    std::ostringstream msg;
    if (report.degenerate) {
        report.pass = false;
        msg << "degenerate: scheme exact";
        report.summary = msg.str();
        return report;
    }
    std::vector<double> n(report.n.begin(), report.n.end());
    const auto slope = slope_or_absent(n, report.err_end);
    const auto [lo, hi] = std::minmax_element(report.scaled.begin(), report.scaled.end());
    report.slope = slope.value_or(std::numeric_limits<double>::quiet_NaN());
    report.scaled_ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    report.pass = slope && report.slope >= bands.slope_min && report.slope <= bands.slope_max &&
                  report.scaled_ratio <= bands.max_scaled_ratio;
    msg << "slope " << report.slope << " (band [" << bands.slope_min << ", " << bands.slope_max
        << "]), max/min of sqrt(n) E " << report.scaled_ratio << " (limit "
        << bands.max_scaled_ratio << ")";
    report.summary = msg.str();
    return report;
}

MomentReport moment_identity_check(std::size_t n, std::size_t draws, std::uint64_t seed) {
    if (n == 0 || draws < 2) {
        throw std::invalid_argument("moment_identity_check: need n >= 1 and at least two draws");
    }
    const double dt = 1.0 / static_cast<double>(n);
    const double scale = std::sqrt(dt);
    RandomStream stream = derive_stream(seed, n);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double dw = scale * stream.normal();
        const double y = (dw * dw - dt) * (dw * dw - dt);
        const double delta = y - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (y - mean);
    }
    MomentReport report;
    report.n = n;
    report.draws = draws;
    report.mean = mean;
    report.std_error = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
    report.target = 2.0 * dt * dt;
    report.pass = std::abs(report.mean - report.target) <= 4.0 * report.std_error;
    return report;
}

}  // namespace polyem
