#include "polyem/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace polyem {
namespace {

// Coefficient buffers for one frozen state.
class FrozenCoefficients {
public:
    explicit FrozenCoefficients(const SdeProblem& problem)
        : problem_(problem),
          singular_(problem.dim, 0.0),
          regular_(problem.dim, 0.0),
          sigma_(problem.dim * problem.dim, 0.0) {}

    void freeze(std::span<const double> x) {
        if (problem_.singular_field) {
            problem_.singular_field(x, singular_);
        }
        if (problem_.regular_drift) {
            problem_.regular_drift(x, regular_);
        }
        problem_.diffusion(x, sigma_);
    }

    // out = x + w G + dt H + sigma dW, row-major accumulation of sigma dW
    void advance(std::span<const double> x, double w, double dt, std::span<const double> dW,
                 std::span<double> out) const {
        const std::size_t d = problem_.dim;
        for (std::size_t i = 0; i < d; ++i) {
            double noise = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                noise += sigma_[i * d + j] * dW[j];
            }
            out[i] = x[i] + w * singular_[i] + dt * regular_[i] + noise;
        }
    }

private:
    const SdeProblem& problem_;
    std::vector<double> singular_;
    std::vector<double> regular_;
    std::vector<double> sigma_;
};

void check_state(const SdeProblem& problem, std::span<const double> x, std::string_view what) {
    if (x.size() != problem.dim) {
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(problem.dim) + ", got " +
                                    std::to_string(x.size()));
    }
}

void check_finite(std::span<const double> x, std::size_t step) {
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw NonFiniteStateError("non-finite state after step " + std::to_string(step));
        }
    }
}

void require_classical(const SdeProblem& problem) {
    if (!problem.classical_em_allowed || problem.has_singular_part) {
        throw std::invalid_argument("classical EM not defined for singular drift (problem " +
                                    problem.name + ")");
    }
}

}  // namespace

std::string_view to_string(Scheme scheme) {
    return scheme == Scheme::polygonal ? "polygonal" : "classical_em";
}

std::vector<double> polygonal_step(const SdeProblem& problem, std::span<const double> x,
                                   double w, double dt, std::span<const double> dW) {
    check_state(problem, x, "state");
    check_state(problem, dW, "increment");
    FrozenCoefficients coeffs(problem);
    coeffs.freeze(x);
    std::vector<double> out(problem.dim);
    coeffs.advance(x, w, dt, dW, out);
    check_finite(out, 0);
    return out;
}

std::vector<double> classical_em_step(const SdeProblem& problem, std::span<const double> x,
                                      double dt, std::span<const double> dW) {
    require_classical(problem);
    check_state(problem, x, "state");
    check_state(problem, dW, "increment");
    FrozenCoefficients coeffs(problem);
    coeffs.freeze(x);
    std::vector<double> out(problem.dim);
    coeffs.advance(x, 0.0, dt, dW, out);
    check_finite(out, 0);
    return out;
}

Trajectory solve_on_grid(const SdeProblem& problem, std::size_t n,
                         std::span<const double> increments, const WeightTable& weights,
                         Scheme scheme) {
    const std::size_t d = problem.dim;
    if (scheme == Scheme::classical_em) {
        require_classical(problem);
    } else if (weights.n != n) {
        throw std::invalid_argument("solve_on_grid: weight table built for n = " +
                                    std::to_string(weights.n) + ", grid has n = " +
                                    std::to_string(n));
    }
    if (increments.size() != n * d) {
        throw std::invalid_argument("solve_on_grid: expected " + std::to_string(n * d) +
                                    " increments, got " + std::to_string(increments.size()));
    }
    Trajectory traj;
    traj.n = n;
    traj.dim = d;
    traj.states.resize((n + 1) * d);
    std::copy(problem.initial_state.begin(), problem.initial_state.end(), traj.states.begin());

    const double dt = 1.0 / static_cast<double>(n);
    FrozenCoefficients coeffs(problem);
    std::span<double> states(traj.states);
    for (std::size_t k = 0; k < n; ++k) {
        const auto x = states.subspan(k * d, d);
        const auto next = states.subspan((k + 1) * d, d);
        const double w = scheme == Scheme::polygonal ? weights.weights[k] : 0.0;
        coeffs.freeze(x);
        coeffs.advance(x, w, dt, increments.subspan(k * d, d), next);
        check_finite(next, k);
    }
    return traj;
}

std::vector<double> extend_to_fine(const SdeProblem& problem, const Trajectory& coarse,
                                   std::span<const double> fine_path,
                                   const WeightTable& fine_weights) {
    const std::size_t d = problem.dim;
    const std::size_t n_ref = fine_weights.n;
    if (coarse.n == 0 || n_ref % coarse.n != 0 || coarse.dim != d) {
        throw std::invalid_argument("extend_to_fine: coarse grid " + std::to_string(coarse.n) +
                                    " does not divide fine grid " + std::to_string(n_ref));
    }
    if (fine_path.size() != (n_ref + 1) * d) {
        throw std::invalid_argument("extend_to_fine: fine path length mismatch");
    }
    const std::size_t block = n_ref / coarse.n;
    const double fine_dt = 1.0 / static_cast<double>(n_ref);
    std::vector<double> out((n_ref + 1) * d);
    std::copy_n(coarse.states.begin(), d, out.begin());

    FrozenCoefficients coeffs(problem);
    std::vector<double> dW(d);
    for (std::size_t k = 0; k < coarse.n; ++k) {
        const auto x = coarse.state(k);
        const std::size_t base = k * block;
        coeffs.freeze(x);
        for (std::size_t m = base + 1; m < base + block; ++m) {
            const double dF = fine_weights.cumulative[m] - fine_weights.cumulative[base];
            const double dt = static_cast<double>(m - base) * fine_dt;
            for (std::size_t i = 0; i < d; ++i) {
                dW[i] = fine_path[m * d + i] - fine_path[base * d + i];
            }
            coeffs.advance(x, dF, dt, dW, std::span<double>(out).subspan(m * d, d));
        }
        const auto end = coarse.state(k + 1);
        std::copy(end.begin(), end.end(), out.begin() + static_cast<std::ptrdiff_t>((base + block) * d));
    }
    return out;
}

std::vector<double> extend_to_fine(const SdeProblem& problem, const Trajectory& coarse,
                                   const PathBundle& bundle, const WeightTable& fine_weights) {
    if (bundle.n_ref != fine_weights.n) {
        throw std::invalid_argument("extend_to_fine: bundle and weight table grids differ");
    }
    return extend_to_fine(problem, coarse, partial_sums(bundle), fine_weights);
}

Trajectory reference_solution(const SdeProblem& problem, const PathBundle& bundle,
                              const WeightTable& fine_weights, Scheme scheme) {
    return solve_on_grid(problem, bundle.n_ref, bundle.increments, fine_weights, scheme);
}

void write_trajectory(const Trajectory& trajectory, std::ostream& out) {
    const auto precision = out.precision();
    out.precision(17);
    for (std::size_t k = 0; k <= trajectory.n; ++k) {
        out << static_cast<double>(k) / static_cast<double>(trajectory.n);
        for (const double v : trajectory.state(k)) {
            out << ' ' << v;
        }
        out << '\n';
    }
    out.precision(precision);
}

}  // namespace polyem
