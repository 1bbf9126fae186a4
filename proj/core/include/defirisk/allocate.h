#pragma once

#include <span>
#include <string>
#include <vector>

#include "defirisk/domain.h"
#include "defirisk/error.h"
#include "defirisk/risk.h"

namespace defirisk {

enum class Method { Ew, Tvl, Erc };

const char* to_string(Method m);
/// Accepts "ew", "tvl", "erc". Throws InvalidArgument otherwise.
Method parse_method(const std::string& text);

/// Backtracking configuration for the projected gradient solver.
struct StepRule {
    double initial_step = 1.0;
    double backtrack_factor = 0.5;
    double armijo = 1e-4;
};

struct ErcSolverOptions {
    int max_iterations = 10000;
    /// Target on the objective f(w). f is quadratic in the weight error,
    /// so 1e-24 keeps weights within ~1e-10 of the parity point.
    double tolerance = 1e-24;
    StepRule step_rule;
    /// Return the closed form directly for strictly diagonal matrices.
    bool diagonal_shortcut = false;
};

enum class StopReason { SingleAsset, ClosedForm, Tolerance, Stalled, MaxIterations };

const char* to_string(StopReason r);

struct ErcSolution {
    WeightVector weights;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    StopReason stop_reason = StopReason::Tolerance;
};

/// Raised when the solver stops above tolerance; carries the best iterate.
class NotConvergedError : public Error {
public:
    explicit NotConvergedError(ErcSolution best);
    const ErcSolution& best() const noexcept { return best_; }

private:
    ErcSolution best_;
};

WeightVector equal_weights(const Universe& universe);

/// Weights proportional to each protocol's TVL.
WeightVector tvl_weights(const Universe& universe);

/// Sum over all ordered pairs (i, j) of (c_i - c_j)^2 with
/// c_i = w_i (m w)_i. Requires a normalized matrix over the same ids.
double erc_objective(const WeightVector& w, const RiskMatrix& m);

/// Unchecked objective and gradient on raw weights; used by the solver.
double erc_objective_raw(std::span<const double> w, const RiskMatrix& m);
std::vector<double> erc_gradient(std::span<const double> w, const RiskMatrix& m);

/// Projected gradient descent on the simplex, started at equal weights.
/// Throws NotNormalized, or NotConvergedError when f stays above tolerance.
ErcSolution solve_erc(const RiskMatrix& m, const ErcSolverOptions& opts = {});

/// w_i proportional to 1/sqrt(m_ii). Throws NotDiagonal.
WeightVector closed_form_diagonal(const RiskMatrix& m);

/// Euclidean projection onto {w >= 0, sum w = 1} by the sorted-threshold
/// method. Throws EmptyVector.
std::vector<double> simplex_projection(std::span<const double> v);
WeightVector project_to_simplex(std::vector<std::string> ids, std::span<const double> v);

/// Weights for `method` over the whole universe (ERC normalizes first).
WeightVector allocate(Method method, const Universe& universe, const ErcSolverOptions& opts = {});

}  // namespace defirisk
