#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polyem/harness.hpp"

namespace polyem {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Environment variable that overrides the configured worker count.
inline constexpr const char* kWorkersEnv = "POLYEM_WORKERS";

/// Sets one configuration key. Keys: example, n_list, n_ref, samples, p_list,
/// seed, beta, K, workers, ls_window. Lists are comma separated; ls_window
/// accepts "all". Throws ConfigError on unknown keys or malformed values.
void apply_config_entry(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Strict validation for user-facing configs: everything in
/// ExperimentConfig::validate plus n_ref strictly above every grid size.
void validate_user_config(const ExperimentConfig& config);

/// Reads "key = value" lines ('#' starts a comment) on top of `base`, then
/// applies the overrides in order. The result is validated.
ExperimentConfig parse_config(std::istream& in,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {},
                              ExperimentConfig base = {});

ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Applies POLYEM_WORKERS if it is set.
void apply_environment(ExperimentConfig& config);

/// errors.csv: n,p,err_end,se_end,err_sup,se_sup with 6 significant digits.
void write_errors_csv(const ErrorTable& table, std::ostream& out);
ErrorTable read_errors_csv(std::istream& in);

/// rates.csv: n,p,rate_end,rate_sup keyed by the finer level of each pair, then
/// one "ls_slope,p,<end>,<sup>" row per p. Undefined values are left empty.
void write_rates_csv(const RateReport& report, std::ostream& out);
RateReport read_rates_csv(std::istream& in);

struct RunManifest {
    std::string command;
    ExperimentConfig config;
    double quadrature_tol = 0.0;
    std::string rng_scheme;
    std::string version;
    double wall_seconds = 0.0;
};

std::string manifest_json(const RunManifest& manifest);

/// Sibling manifest path: "<csv>.manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& csv);

/// Log-log series of one (p, endpoint|sup) column: "log2_n log2_err log2_ref",
/// where log2_ref is the slope -1/2 line through the coarsest point. With a
/// single level the reference column is dropped. Zero errors are skipped.
void write_loglog(const ErrorTable& table, double p, bool sup, std::ostream& out);

/// One loglog_<end|sup>_p<p>.dat file per series inside dir.
std::vector<std::filesystem::path> write_loglog_files(const ErrorTable& table,
                                                      const std::filesystem::path& dir);

std::string version_string();

}  // namespace polyem
