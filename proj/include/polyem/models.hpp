#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyem/modulus.hpp"

namespace polyem {

/// Writes a vector field value: out has length dim.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;
/// Writes a dim x dim matrix in row-major order: out has length dim * dim.
using MatrixField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// SDE dX = (f(t) G(X) + H(X)) dt + sigma(X) dW on [0, 1].
///
/// f is the shared singular time factor. Problems without a singular part
/// leave singular_field empty and are the only ones admitted by classical EM.
struct SdeProblem {
    std::string name;
    std::size_t dim = 1;
    std::vector<double> initial_state;
    VectorField singular_field;  // G; empty when has_singular_part is false
    VectorField regular_drift;   // H; empty means H = 0
    MatrixField diffusion;       // sigma
    bool has_singular_part = false;
    bool classical_em_allowed = false;
};

/// d = 1: b(t, x) = f(t) g_K(x), sigma(x) = 1 + 0.5 tanh(x), X_0 = 0.
SdeProblem example_a(const ModulusSpec& spec);

/// d = 2 coupled problem: G(x) = (g_K(x1 + 0.35 x2), g_K(x2 - 0.25 x1)),
/// bounded H built from tanh and psi, sigma = I + 0.25 S(x) symmetric.
SdeProblem example_b(const ModulusSpec& spec);

/// d = 1, b = 0, sigma(x) = 2 + tanh(x), X_0 = 0.
SdeProblem lower_bound_problem();

/// Driftless problem with sigma = c I in dimension dim, started at 0.
/// Both schemes are exact for it; used as a control.
SdeProblem constant_diffusion_problem(std::size_t dim, double c);

/// Catalog lookup: "A", "B" or "lower". Throws std::invalid_argument otherwise.
SdeProblem make_problem(std::string_view name, const ModulusSpec& spec);

struct DriftParts {
    std::vector<double> singular;  // G(x)
    std::vector<double> regular;   // H(x)
};

/// G(x) and H(x) separately. Throws std::invalid_argument on a dimension mismatch.
DriftParts eval_drift_parts(const SdeProblem& problem, std::span<const double> x);

/// sigma(x) as a row-major dim x dim matrix.
std::vector<double> eval_sigma(const SdeProblem& problem, std::span<const double> x);

}  // namespace polyem
