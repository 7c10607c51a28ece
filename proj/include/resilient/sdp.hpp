#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "resilient/linalg.hpp"
#include "resilient/settings.hpp"

namespace resilient {

/// F(x) = F0 + Σᵢ xᵢ·Fᵢ, constrained F(x) ≺ 0.
struct AffineLmi {
  Matrix F0;
  std::vector<Matrix> Fi;

  Index dimension() const { return F0.rows(); }
  std::size_t num_vars() const { return Fi.size(); }

  Matrix evaluate(std::span<const double> x) const;
  /// max ‖Fᵢ‖_F (the F0 term excluded); the unit for solver tolerances.
  double scale() const;
};

enum class FeasibilityStatus { feasible, infeasible, numerical_failure };

std::string_view to_string(FeasibilityStatus s);

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::numerical_failure;
  std::vector<double> x;
  double margin = 0.0;       ///< −λmax(F(x)); > 0 iff feasible
  double lower_bound = 0.0;  ///< certified lower bound on min t s.t. F(x) ⪯ tI, ‖x‖ ≤ bound
  int iterations = 0;
};

/// Strict LMI feasibility by minimizing t subject to F(x) ⪯ t·I and
/// ‖x‖₂ ≤ settings.variable_bound, with a log-barrier path-following method.
///
/// Feasible iff the final λmax(F(x)) < −eps_strict·scale. Infeasible is only
/// reported with a duality-gap lower bound: either a (possibly approximately)
/// centered point proves t* ≥ −eps_strict·scale, or the path converged
/// (gap ≤ duality_tol·scale) without reaching −eps_strict·scale. Running out
/// of iterations or stalling far from the central path is numerical_failure.
/// Deterministic for fixed inputs.
FeasibilityResult solve_feasibility(const AffineLmi& lmi, const NumericSettings& settings = {});

}  // namespace resilient
