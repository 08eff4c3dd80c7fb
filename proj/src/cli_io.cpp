#include "polyem/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "polyem/paths.hpp"

#ifndef POLYEM_VERSION
#define POLYEM_VERSION "0.0.0"
#endif

namespace polyem {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

template <class T>
T parse_integer(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    // "2^k" shorthand for powers of two
    if (const auto caret = text.find('^'); caret != std::string_view::npos) {
        const auto base = parse_integer<T>(key, text.substr(0, caret));
        const auto exponent = parse_integer<unsigned>(key, text.substr(caret + 1));
        if (base != 2 || exponent >= 8 * sizeof(T) - 1) {
            throw ConfigError("config key '" + std::string(key) + "': unsupported power '" +
                              std::string(text) + "'");
        }
        return T{1} << exponent;
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config key '" + std::string(key) + "': expected an integer, got '" +
                          std::string(text) + "'");
    }
    return value;
}

double parse_real(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config key '" + std::string(key) + "': expected a number, got '" +
                          std::string(text) + "'");
    }
    return value;
}

std::vector<std::size_t> parse_grid_list(std::string_view key, std::string_view text) {
    text = trim(text);
    // "lo..hi" expands to the dyadic range lo, 2 lo, ..., hi
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const auto lo = parse_integer<std::size_t>(key, text.substr(0, dots));
        const auto hi = parse_integer<std::size_t>(key, text.substr(dots + 2));
        if (!is_power_of_two(lo) || !is_power_of_two(hi) || lo > hi) {
            throw ConfigError("grid sizes must be powers of two dividing n_ref (range '" +
                              std::string(text) + "')");
        }
        std::vector<std::size_t> out;
        for (std::size_t n = lo; n <= hi; n *= 2) {
            out.push_back(n);
        }
        return out;
    }
    std::vector<std::size_t> out;
    for (const auto part : split(text, ',')) {
        out.push_back(parse_integer<std::size_t>(key, part));
    }
    return out;
}

std::string format_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_g(*v, 6) : std::string{};
}

std::optional<double> parse_optional(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_real(key, text);
}

std::vector<std::string_view> csv_fields(const std::string& line, std::size_t expected,
                                         std::size_t line_no) {
    auto fields = split(line, ',');
    if (fields.size() != expected) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expected) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    return fields;
}

}  // namespace

void apply_config_entry(ExperimentConfig& config, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "example") {
        if (value != "A" && value != "B" && value != "lower") {
            throw ConfigError("config key 'example': expected A, B or lower, got '" +
                              std::string(value) + "'");
        }
        config.problem = std::string(value);
    } else if (key == "n_list") {
        config.n_list = parse_grid_list(key, value);
    } else if (key == "n_ref") {
        config.n_ref = parse_integer<std::size_t>(key, value);
    } else if (key == "samples") {
        const auto m = parse_integer<long long>(key, value);
        if (m <= 0) {
            throw ConfigError("config key 'samples': must be positive");
        }
        config.samples = static_cast<std::size_t>(m);
    } else if (key == "p_list") {
        config.p_list.clear();
        for (const auto part : split(value, ',')) {
            config.p_list.push_back(parse_real(key, part));
        }
    } else if (key == "seed") {
        config.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "beta") {
        config.modulus.beta = parse_real(key, value);
    } else if (key == "K") {
        config.modulus.levels = parse_integer<int>(key, value);
    } else if (key == "workers") {
        config.workers = std::max(1u, parse_integer<unsigned>(key, value));
    } else if (key == "ls_window") {
        if (value == "all") {
            config.ls_window.reset();
        } else {
            config.ls_window = parse_integer<std::size_t>(key, value);
        }
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void validate_user_config(const ExperimentConfig& config) {
    try {
        config.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    if (config.n_list.back() >= config.n_ref) {
        throw ConfigError("n_ref must be strictly larger than every grid size");
    }
}

ExperimentConfig parse_config(std::istream& in,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              ExperimentConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        apply_config_entry(base, text.substr(0, eq), text.substr(eq + 1));
    }
    for (const auto& [key, value] : overrides) {
        apply_config_entry(base, key, value);
    }
    validate_user_config(base);
    return base;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    return parse_config(in, overrides);
}

void apply_environment(ExperimentConfig& config) {
    if (const char* env = std::getenv(kWorkersEnv); env != nullptr && *env != '\0') {
        apply_config_entry(config, "workers", env);
    }
}

void write_errors_csv(const ErrorTable& table, std::ostream& out) {
    out << "n,p,err_end,se_end,err_sup,se_sup\n";
    for (const auto& row : table.rows) {
        out << row.n << ',' << format_g(row.p, 6) << ',' << format_g(row.err_end, 6) << ','
            << format_g(row.se_end, 6) << ',' << format_g(row.err_sup, 6) << ','
            << format_g(row.se_sup, 6) << '\n';
    }
}

ErrorTable read_errors_csv(std::istream& in) {
    ErrorTable table;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (header) {
            if (trim(line) != "n,p,err_end,se_end,err_sup,se_sup") {
                throw std::runtime_error("errors.csv: unexpected header '" + line + "'");
            }
            header = false;
            continue;
        }
        const auto f = csv_fields(line, 6, line_no);
        ErrorRow row;
        row.n = parse_integer<std::size_t>("n", f[0]);
        row.p = parse_real("p", f[1]);
        row.err_end = parse_real("err_end", f[2]);
        row.se_end = parse_real("se_end", f[3]);
        row.err_sup = parse_real("err_sup", f[4]);
        row.se_sup = parse_real("se_sup", f[5]);
        table.rows.push_back(row);
    }
    if (header) {
        throw std::runtime_error("errors.csv: missing header");
    }
    return table;
}

void write_rates_csv(const RateReport& report, std::ostream& out) {
    out << "n,p,rate_end,rate_sup\n";
    for (const auto& row : report.rates) {
        out << row.n_fine << ',' << format_g(row.p, 6) << ',' << format_optional(row.rate_end)
            << ',' << format_optional(row.rate_sup) << '\n';
    }
    for (const auto& row : report.slopes) {
        out << "ls_slope," << format_g(row.p, 6) << ',' << format_optional(row.slope_end) << ','
            << format_optional(row.slope_sup) << '\n';
    }
}

RateReport read_rates_csv(std::istream& in) {
    RateReport report;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        const auto f = csv_fields(line, 4, line_no);
        const double p = parse_real("p", f[1]);
        if (f[0] == "ls_slope") {
            report.slopes.push_back({p, parse_optional("ls_slope_end", f[2]),
                                     parse_optional("ls_slope_sup", f[3])});
        } else {
            RateRow row;
            row.n_fine = parse_integer<std::size_t>("n", f[0]);
            row.p = p;
            row.rate_end = parse_optional("rate_end", f[2]);
            row.rate_sup = parse_optional("rate_sup", f[3]);
            report.rates.push_back(row);
        }
    }
    return report;
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["example"] = m.config.problem;
    j["scheme"] = std::string(to_string(m.config.scheme));
    j["n_list"] = m.config.n_list;
    j["n_ref"] = m.config.n_ref;
    j["samples"] = m.config.samples;
    j["p_list"] = m.config.p_list;
    j["seed"] = m.config.seed;
    j["beta"] = m.config.modulus.beta;
    j["K"] = m.config.modulus.levels;
    j["workers"] = m.config.workers;
    if (m.config.ls_window) {
        j["ls_window"] = *m.config.ls_window;
    } else {
        j["ls_window"] = "all";
    }
    j["quadrature_tol"] = m.quadrature_tol;
    j["rng_scheme"] = m.rng_scheme;
    j["wall_seconds"] = m.wall_seconds;
    return j.dump(2) + "\n";
}

std::filesystem::path manifest_path(const std::filesystem::path& csv) {
    return std::filesystem::path(csv.string() + ".manifest.json");
}

void write_loglog(const ErrorTable& table, double p, bool sup, std::ostream& out) {
    std::vector<std::pair<double, double>> points;
    for (const auto& row : table.rows) {
        const double err = sup ? row.err_sup : row.err_end;
        if (row.p == p && err > 0.0) {
            points.emplace_back(std::log2(static_cast<double>(row.n)), std::log2(err));
        }
    }
    std::sort(points.begin(), points.end());
    const bool with_ref = points.size() >= 2;
    out << (with_ref ? "log2_n log2_err log2_ref\n" : "log2_n log2_err\n");
    for (const auto& [x, y] : points) {
        out << format_g(x, 6) << ' ' << format_g(y, 6);
        if (with_ref) {
            out << ' ' << format_g(points.front().second - 0.5 * (x - points.front().first), 6);
        }
        out << '\n';
    }
}

std::vector<std::filesystem::path> write_loglog_files(const ErrorTable& table,
                                                      const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const double p : table.moments()) {
        for (const bool sup : {false, true}) {
            const auto path =
                dir / ("loglog_" + std::string(sup ? "sup" : "end") + "_p" + format_g(p, 6) + ".dat");
            std::ofstream out(path);
            if (!out) {
                throw std::runtime_error("cannot write " + path.string());
            }
            write_loglog(table, p, sup, out);
            written.push_back(path);
        }
    }
    return written;
}

std::string version_string() { return POLYEM_VERSION; }

}  // namespace polyem
