#include "polyem/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace polyem {
namespace {

void check_dim(const SdeProblem& problem, std::span<const double> x) {
    if (x.size() != problem.dim) {
        throw std::invalid_argument("problem " + problem.name + ": state has length " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(problem.dim));
    }
}

}  // namespace

SdeProblem example_a(const ModulusSpec& spec) {
    auto series = std::make_shared<const SawtoothSeries>(spec);
    SdeProblem p;
    p.name = "A";
    p.dim = 1;
    p.initial_state = {0.0};
    p.singular_field = [series](std::span<const double> x, std::span<double> out) {
        out[0] = (*series)(x[0]);
    };
    p.diffusion = [](std::span<const double> x, std::span<double> out) {
        out[0] = 1.0 + 0.5 * std::tanh(x[0]);
    };
    p.has_singular_part = true;
    p.classical_em_allowed = false;
    return p;
}

SdeProblem example_b(const ModulusSpec& spec) {
    auto series = std::make_shared<const SawtoothSeries>(spec);
    SdeProblem p;
    p.name = "B";
    p.dim = 2;
    p.initial_state = {0.0, 0.0};
    p.singular_field = [series](std::span<const double> x, std::span<double> out) {
        out[0] = (*series)(x[0] + 0.35 * x[1]);
        out[1] = (*series)(x[1] - 0.25 * x[0]);
    };
    p.regular_drift = [](std::span<const double> x, std::span<double> out) {
        out[0] = 0.25 * std::tanh(x[1]) + 0.1 * psi(x[0] - x[1]);
        out[1] = psi(x[1]) + 0.12 * std::tanh(x[0]) + 0.08 * psi(x[0] + x[1]);
    };
    p.diffusion = [](std::span<const double> x, std::span<double> out) {
        constexpr double eps = 0.25;
        const double off = eps * 0.3 * std::tanh(x[0] + x[1]);
        out[0] = 1.0 + eps * std::tanh(x[0]);
        out[1] = off;
        out[2] = off;
        out[3] = 1.0 + eps * std::tanh(x[1]);
    };
    p.has_singular_part = true;
    p.classical_em_allowed = false;
    return p;
}

SdeProblem lower_bound_problem() {
    SdeProblem p;
    p.name = "lower";
    p.dim = 1;
    p.initial_state = {0.0};
    p.diffusion = [](std::span<const double> x, std::span<double> out) {
        out[0] = 2.0 + std::tanh(x[0]);
    };
    p.has_singular_part = false;
    p.classical_em_allowed = true;
    return p;
}

SdeProblem constant_diffusion_problem(std::size_t dim, double c) {
    if (dim == 0) {
        throw std::invalid_argument("constant_diffusion_problem: dim must be >= 1");
    }
    SdeProblem p;
    p.name = "const";
    p.dim = dim;
    p.initial_state.assign(dim, 0.0);
    p.diffusion = [dim, c](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            out[i * dim + i] = c;
        }
    };
    p.has_singular_part = false;
    p.classical_em_allowed = true;
    return p;
}

SdeProblem make_problem(std::string_view name, const ModulusSpec& spec) {
    if (name == "A") {
        return example_a(spec);
    }
    if (name == "B") {
        return example_b(spec);
    }
    if (name == "lower") {
        return lower_bound_problem();
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "' (expected A, B or lower)");
}

DriftParts eval_drift_parts(const SdeProblem& problem, std::span<const double> x) {
    check_dim(problem, x);
    DriftParts parts{std::vector<double>(problem.dim, 0.0), std::vector<double>(problem.dim, 0.0)};
    if (problem.singular_field) {
        problem.singular_field(x, parts.singular);
    }
    if (problem.regular_drift) {
        problem.regular_drift(x, parts.regular);
    }
    return parts;
}

std::vector<double> eval_sigma(const SdeProblem& problem, std::span<const double> x) {
    check_dim(problem, x);
    std::vector<double> sigma(problem.dim * problem.dim, 0.0);
    problem.diffusion(x, sigma);
    return sigma;
}

}  // namespace polyem
