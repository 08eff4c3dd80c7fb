#include "polyem/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "polyem/quadrature.hpp"

namespace polyem {

void ModulusSpec::validate() const {
    if (!(beta > 2.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("modulus: beta must be a finite value > 2, got " +
                                    std::to_string(beta));
    }
    if (levels < 1) {
        throw std::invalid_argument("modulus: truncation level K must be >= 1, got " +
                                    std::to_string(levels));
    }
}

double rho(double r, const ModulusSpec& spec) {
    if (!(r > 0.0 && r <= 1.0)) {
        throw std::domain_error("rho: argument must lie in (0, 1], got " + std::to_string(r));
    }
    return std::pow(1.0 - std::log(r), -spec.beta);
}

double sawtooth(double v) { return std::abs(v - std::nearbyint(v)); }

double level_weight(int k, const ModulusSpec& spec) {
    if (k < 1) {
        throw std::domain_error("level_weight: k must be >= 1");
    }
    // log(e / 2^{-k}) = 1 + k log 2
    const double ell = 1.0 + k * std::numbers::ln2;
    const double head = std::pow(ell, -spec.beta);
    // 1 - (ell / (ell + log 2))^beta
    const double gap = -std::expm1(-spec.beta * std::log1p(std::numbers::ln2 / ell));
    return head * gap;
}

SawtoothSeries::SawtoothSeries(const ModulusSpec& spec) : spec_(spec) {
    spec_.validate();
    weights_.resize(static_cast<std::size_t>(spec_.levels));
    for (int k = 1; k <= spec_.levels; ++k) {
        weights_[static_cast<std::size_t>(k - 1)] = level_weight(k, spec_);
    }
}

double SawtoothSeries::operator()(double x) const {
    double v = x;
    double sum = 0.0;
    for (const double a : weights_) {
        v += v;
        const double frac = v - std::nearbyint(v);
        if (frac == 0.0) {
            break;
        }
        sum += a * std::abs(frac);
    }
    return sum;
}

double SawtoothSeries::lipschitz_bound() const {
    double bound = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        bound += std::ldexp(weights_[i], static_cast<int>(i) + 1);
    }
    return bound;
}

double SawtoothSeries::sup_bound() const { return 0.5 * rho(0.5, spec_); }

double g_series(double x, const ModulusSpec& spec) { return SawtoothSeries(spec)(x); }

double time_factor(double t) {
    if (!(t > 0.0 && t <= 1.0)) {
        throw std::domain_error("time_factor: argument must lie in (0, 1], got " +
                                std::to_string(t));
    }
    return 1.0 / (std::sqrt(t) * (1.0 - std::log(t)));
}

double psi(double z) {
    if (z == 0.0) {
        return 0.0;
    }
    const double a = std::pow(std::abs(z), 0.4);
    return std::copysign(a / (1.0 + a), z);
}

SlowVariationReport check_slow_variation(const ModulusSpec& spec,
                                         std::span<const double> upsilons,
                                         std::span<const double> radii) {
    SlowVariationReport report;
    if (radii.empty()) {
        return report;
    }
    const double smallest = *std::min_element(radii.begin(), radii.end());
    for (const double upsilon : upsilons) {
        if (!(upsilon > 0.0)) {
            throw std::domain_error("check_slow_variation: upsilon must be positive");
        }
        double previous = std::numeric_limits<double>::infinity();
        for (const double r : radii) {
            if (upsilon * r > 1.0) {
                throw std::domain_error("check_slow_variation: upsilon * r exceeds 1");
            }
            const double ratio = rho(upsilon * r, spec) / rho(r, spec);
            const double deviation = std::abs(ratio - 1.0);
            if (deviation > previous) {
                report.monotone = false;
            }
            previous = deviation;
            report.rows.push_back({upsilon, r, ratio, deviation});
            if (r == smallest) {
                report.max_deviation_at_smallest_r =
                    std::max(report.max_deviation_at_smallest_r, deviation);
            }
        }
    }
    return report;
}

DiniReport check_dini_integral(const ModulusSpec& spec, double exponent,
                               std::span<const double> eps_list) {
    if (!(exponent > 0.0)) {
        throw std::domain_error("check_dini_integral: exponent must be positive");
    }
    const double q = exponent * spec.beta;
    DiniReport report;
    report.exponent = exponent;
    report.convergent = q > 1.0;
    report.limit = report.convergent ? 1.0 / (q - 1.0)
                                     : std::numeric_limits<double>::infinity();

    // rho(r)^a / r dr = (1 + s)^{-q} ds with s = log(1/r)
    const auto integrand = [q](double s) { return std::pow(1.0 + s, -q); };
    double previous = 0.0;
    for (const double eps : eps_list) {
        if (!(eps > 0.0 && eps <= 1.0)) {
            throw std::domain_error("check_dini_integral: eps must lie in (0, 1]");
        }
        const double upper = -std::log(eps);
        DiniRow row{};
        row.eps = eps;
        row.partial = adaptive_simpson(integrand, 0.0, upper, 1e-13);
        if (q == 1.0) {
            row.closed_form = std::log1p(upper);
            row.tail = std::numeric_limits<double>::infinity();
        } else {
            const double at_upper = std::pow(1.0 + upper, 1.0 - q);
            row.closed_form = (1.0 - at_upper) / (q - 1.0);
            row.tail = q > 1.0 ? at_upper / (q - 1.0) : std::numeric_limits<double>::infinity();
        }
        row.extrapolated = row.partial + row.tail;
        row.increment = row.partial - previous;
        previous = row.partial;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace polyem
