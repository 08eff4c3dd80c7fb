// polyem: strong-convergence experiments for the polygonal Euler-Maruyama
// scheme with time-singular drift.
//
//   polyem run        --example A --samples 1000 --n-ref 2^15 --out errors.csv
//   polyem rates      --in errors.csv --out rates.csv
//   polyem lowerbound --samples 4000
//   polyem check-modulus
//   polyem check-paths

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "polyem/checks.hpp"
#include "polyem/cli_io.hpp"
#include "polyem/harness.hpp"
#include "polyem/paths.hpp"
#include "polyem/quadrature.hpp"
#include "polyem/scheme.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct ConfigFlags {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::string> example, n_list, n_ref, samples, p_list, seed, beta, levels,
        workers, ls_window;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key = value config file");
        app->add_option("--set", sets, "override a config key, key=value (repeatable)");
        app->add_option("--example", example, "problem: A, B or lower");
        app->add_option("--n-list", n_list, "grid sizes, e.g. 64,128 or 64..2048");
        app->add_option("--n-ref", n_ref, "reference grid size, e.g. 32768 or 2^15");
        app->add_option("--samples", samples, "Monte Carlo sample count");
        app->add_option("--p-list", p_list, "moment orders, e.g. 2,4");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--beta", beta, "modulus exponent beta");
        app->add_option("--K", levels, "sawtooth truncation level");
        app->add_option("--workers", workers, "worker threads");
        app->add_option("--ls-window", ls_window, "finest levels used for LS slopes, or 'all'");
    }

    // file < environment < flags
    polyem::ExperimentConfig load(polyem::ExperimentConfig base) const {
        base.workers = std::max(1u, std::thread::hardware_concurrency());
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw polyem::ConfigError("cannot read config file " + config_path);
            }
            base = polyem::parse_config(in, {}, base);
        }
        polyem::apply_environment(base);
        Overrides overrides;
        const auto push = [&](const char* key, const std::optional<std::string>& v) {
            if (v) {
                overrides.emplace_back(key, *v);
            }
        };
        push("example", example);
        push("n_list", n_list);
        push("n_ref", n_ref);
        push("samples", samples);
        push("p_list", p_list);
        push("seed", seed);
        push("beta", beta);
        push("K", levels);
        push("workers", workers);
        push("ls_window", ls_window);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw polyem::ConfigError("--set expects key=value, got '" + s + "'");
            }
            overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        std::istringstream empty;
        return polyem::parse_config(empty, overrides, base);
    }
};

void write_file(const std::string& path, const std::string& what, const auto& writer) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + what + " to " + path);
    }
    writer(out);
}

void write_manifest(const std::string& csv, const std::string& command,
                    const polyem::ExperimentConfig& config, double seconds) {
    polyem::RunManifest m;
    m.command = command;
    m.config = config;
    m.quadrature_tol = config.quadrature_tol;
    m.rng_scheme = std::string(polyem::kRngScheme);
    m.version = polyem::version_string();
    m.wall_seconds = seconds;
    write_file(polyem::manifest_path(csv).string(), "manifest",
               [&](std::ostream& out) { out << polyem::manifest_json(m); });
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strong-convergence experiments for the polygonal Euler-Maruyama scheme"};
    app.require_subcommand(1);
    app.set_version_flag("--version", polyem::version_string());

    ConfigFlags run_flags;
    std::string run_out = "errors.csv";
    std::string run_rates;
    std::string run_loglog;
    auto* run = app.add_subcommand("run", "run a strong-error experiment, write errors.csv");
    run_flags.attach(run);
    run->add_option("--out", run_out, "errors.csv path");
    run->add_option("--rates-out", run_rates, "also write rates.csv here");
    run->add_option("--loglog-dir", run_loglog, "also write log-log plot data here");

    std::string rates_in = "errors.csv";
    std::string rates_out = "rates.csv";
    std::string rates_window;
    auto* rates = app.add_subcommand("rates", "two-level rates and LS slopes from errors.csv");
    rates->add_option("--in", rates_in, "errors.csv path");
    rates->add_option("--out", rates_out, "rates.csv path");
    rates->add_option("--ls-window", rates_window, "finest levels used for LS slopes, or 'all'");

    ConfigFlags lb_flags;
    std::string lb_out;
    polyem::LowerBoundBands bands;
    auto* lower = app.add_subcommand("lowerbound", "order-1/2 optimality check with classical EM");
    lb_flags.attach(lower);
    lower->add_option("--out", lb_out, "optional errors.csv path");
    lower->add_option("--slope-min", bands.slope_min, "lower end of the slope band");
    lower->add_option("--slope-max", bands.slope_max, "upper end of the slope band");
    lower->add_option("--max-ratio", bands.max_scaled_ratio, "limit on max/min of sqrt(n) E");

    double mod_beta = 3.0;
    int mod_levels = 800;
    auto* check_mod = app.add_subcommand("check-modulus", "analytic property suite");
    check_mod->add_option("--beta", mod_beta, "modulus exponent beta");
    check_mod->add_option("--K", mod_levels, "sawtooth truncation level");

    std::uint64_t path_seed = 20240601;
    std::size_t path_draws = 1000000;
    auto* check_paths = app.add_subcommand("check-paths", "moment identity and path invariants");
    check_paths->add_option("--seed", path_seed, "master seed");
    check_paths->add_option("--draws", path_draws, "draws per moment check");

    std::size_t dump_n = 64;
    double dump_tol = polyem::kDefaultWeightTolerance;
    std::string dump_out;
    auto* dump_weights = app.add_subcommand("dump-weights", "print a drift weight table");
    dump_weights->add_option("--n", dump_n, "grid size")->check(CLI::PositiveNumber);
    dump_weights->add_option("--tol", dump_tol, "per-interval tolerance");
    dump_weights->add_option("--out", dump_out, "output path (default stdout)");

    ConfigFlags path_flags;
    std::size_t path_n = 64;
    std::uint64_t path_sample = 0;
    std::string path_out;
    auto* dump_path = app.add_subcommand("dump-path", "print one coarse trajectory");
    path_flags.attach(dump_path);
    dump_path->add_option("--n", path_n, "coarse grid size");
    dump_path->add_option("--sample", path_sample, "sample index");
    dump_path->add_option("--traj-out", path_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto start = std::chrono::steady_clock::now();
            const auto config = run_flags.load({});
            const auto table = polyem::run_experiment(config);
            write_file(run_out, "errors", [&](std::ostream& out) { polyem::write_errors_csv(table, out); });
            write_manifest(run_out, "run", config, seconds_since(start));
            if (!run_rates.empty()) {
                write_file(run_rates, "rates", [&](std::ostream& out) {
                    polyem::write_rates_csv(polyem::rate_report(table, config.ls_window), out);
                });
            }
            if (!run_loglog.empty()) {
                polyem::write_loglog_files(table, run_loglog);
            }
            std::cout << "wrote " << run_out << " (" << table.rows.size() << " rows)\n";
            return 0;
        }
        if (rates->parsed()) {
            std::ifstream in(rates_in);
            if (!in) {
                throw std::runtime_error("cannot read " + rates_in);
            }
            const auto table = polyem::read_errors_csv(in);
            polyem::ExperimentConfig window_cfg;
            if (!rates_window.empty()) {
                polyem::apply_config_entry(window_cfg, "ls_window", rates_window);
            }
            write_file(rates_out, "rates", [&](std::ostream& out) {
                polyem::write_rates_csv(polyem::rate_report(table, window_cfg.ls_window), out);
            });
            std::cout << "wrote " << rates_out << '\n';
            return 0;
        }
        if (lower->parsed()) {
            polyem::ExperimentConfig base;
            base.problem = "lower";
            base.n_list = {64, 128, 256, 512, 1024, 2048};
            base.n_ref = std::size_t{1} << 15;
            base.samples = 4000;
            const auto start = std::chrono::steady_clock::now();
            const auto config = lb_flags.load(base);
            const auto report = polyem::lower_bound_check(config, bands);
            if (!lb_out.empty()) {
                polyem::ErrorTable table;
                for (std::size_t i = 0; i < report.n.size(); ++i) {
                    table.rows.push_back({report.n[i], 2.0, report.err_end[i], 0.0, 0.0, 0.0});
                }
                write_file(lb_out, "errors", [&](std::ostream& out) { polyem::write_errors_csv(table, out); });
                auto manifest_cfg = config;
                manifest_cfg.scheme = polyem::Scheme::classical_em;
                write_manifest(lb_out, "lowerbound", manifest_cfg, seconds_since(start));
            }
            for (std::size_t i = 0; i < report.n.size(); ++i) {
                std::cout << "n=" << report.n[i] << " E2_end=" << report.err_end[i]
                          << " sqrt(n)*E=" << report.scaled[i] << '\n';
            }
            std::cout << report.summary << '\n';
            if (!report.pass) {
                std::cerr << "lowerbound: check failed: " << report.summary << '\n';
                return 1;
            }
            return 0;
        }
        if (check_mod->parsed()) {
            const auto results = polyem::modulus_property_suite({mod_beta, mod_levels});
            if (!polyem::print_checks(results, std::cout)) {
                std::cerr << "check-modulus: at least one property failed\n";
                return 1;
            }
            return 0;
        }
        if (check_paths->parsed()) {
            const auto results = polyem::path_property_suite(path_seed, path_draws);
            if (!polyem::print_checks(results, std::cout)) {
                std::cerr << "check-paths: at least one property failed\n";
                return 1;
            }
            return 0;
        }
        if (dump_weights->parsed()) {
            const auto table = polyem::build_weight_table(dump_n, dump_tol);
            if (dump_out.empty()) {
                polyem::write_weight_table(table, std::cout);
            } else {
                write_file(dump_out, "weights", [&](std::ostream& out) { polyem::write_weight_table(table, out); });
            }
            return 0;
        }
        if (dump_path->parsed()) {
            polyem::ExperimentConfig base;
            base.n_list = {path_n};
            base.n_ref = std::max<std::size_t>(2 * path_n, 1024);
            const auto config = path_flags.load(base);
            const auto problem = polyem::make_problem(config.problem, config.modulus);
            const auto bundle = polyem::sample_fine_increments(config.seed, path_sample,
                                                               config.n_ref, problem.dim);
            const auto scheme = problem.classical_em_allowed ? polyem::Scheme::classical_em
                                                             : polyem::Scheme::polygonal;
            const auto traj = polyem::solve_on_grid(problem, path_n, polyem::aggregate(bundle, path_n),
                                                    polyem::build_weight_table(path_n), scheme);
            if (path_out.empty()) {
                polyem::write_trajectory(traj, std::cout);
            } else {
                write_file(path_out, "trajectory", [&](std::ostream& out) { polyem::write_trajectory(traj, out); });
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << app.get_subcommands().front()->get_name() << ": " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
