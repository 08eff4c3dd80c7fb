#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "polyem/models.hpp"
#include "polyem/paths.hpp"
#include "polyem/quadrature.hpp"

namespace polyem {

enum class Scheme {
    polygonal,     // drift integrated exactly in time, space frozen at t_k
    classical_em,  // drift and diffusion frozen at (t_k, X_{t_k})
};

std::string_view to_string(Scheme scheme);

/// A state overflowed or became NaN during stepping.
class NonFiniteStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Discrete solution at the nodes t_k = k/n; states is time-major (n+1) x dim.
struct Trajectory {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> states;

    std::span<const double> state(std::size_t k) const {
        return std::span<const double>(states).subspan(k * dim, dim);
    }
};

/// x + w G(x) + dt H(x) + sigma(x) dW, where w is the integral of the time
/// factor over the step.
std::vector<double> polygonal_step(const SdeProblem& problem, std::span<const double> x,
                                   double w, double dt, std::span<const double> dW);

/// x + dt H(x) + sigma(x) dW. Throws std::invalid_argument for problems with a
/// time-singular drift part.
std::vector<double> classical_em_step(const SdeProblem& problem, std::span<const double> x,
                                      double dt, std::span<const double> dW);

/// Iterates the chosen one-step map over n uniform steps. increments is the
/// time-major n x dim array of Wiener increments; weights must be built on n.
/// Throws NonFiniteStateError if a state leaves the doubles.
Trajectory solve_on_grid(const SdeProblem& problem, std::size_t n,
                         std::span<const double> increments, const WeightTable& weights,
                         Scheme scheme = Scheme::polygonal);

/// Continuous-time interpolant of a coarse solution at every fine node.
///
/// For tau in (t_k, t_{k+1}) the value is
///   X_k + (F(tau) - F(t_k)) G(X_k) + (tau - t_k) H(X_k) + sigma(X_k) (W_tau - W_{t_k})
/// with F the fine cumulative weights and W the fine partial sums. Coarse nodes
/// carry the coarse states verbatim. Returns a time-major (n_ref + 1) x dim array.
std::vector<double> extend_to_fine(const SdeProblem& problem, const Trajectory& coarse,
                                   std::span<const double> fine_path,
                                   const WeightTable& fine_weights);

std::vector<double> extend_to_fine(const SdeProblem& problem, const Trajectory& coarse,
                                   const PathBundle& bundle, const WeightTable& fine_weights);

/// solve_on_grid on the bundle's own fine grid.
Trajectory reference_solution(const SdeProblem& problem, const PathBundle& bundle,
                              const WeightTable& fine_weights,
                              Scheme scheme = Scheme::polygonal);

/// Rows "t x1 [x2 ...]".
void write_trajectory(const Trajectory& trajectory, std::ostream& out);

}  // namespace polyem
