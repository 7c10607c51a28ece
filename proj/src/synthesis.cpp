#include "resilient/synthesis.hpp"

#include <sstream>

namespace resilient {

Matrix compute_w(const SvdStructure& svd, const Matrix& Q11, const NumericSettings& settings) {
  const Matrix b0vt = svd.B0 * svd.V.transpose();
  return solve(b0vt, Q11 * b0vt, settings.singular_tol);
}

StabilityVerdict verify_gains(const AttackedSystem& sys, const Gains& gains,
                              const NumericSettings& settings) {
  return is_ms_stable(second_moment_operator(build_closed_loop(sys, gains, settings)), settings);
}

SynthesisResult synthesize(const AttackedSystem& input, const NumericSettings& settings) {
  const AttackedSystem sys = validate(input, settings);
  const auto svd = svd_structure(sys.plant.B, settings);
  const auto assembly = assemble(sys, svd, settings);
  const auto solution = solve_feasibility(assembly.lmi, settings);

  if (solution.status == FeasibilityStatus::infeasible) {
    std::ostringstream os;
    os << "no resilient controller found at these attack statistics (LMI infeasible, best "
          "margin "
       << solution.margin << ")";
    throw SynthesisError(SynthesisError::Reason::infeasible, os.str());
  }
  if (solution.status == FeasibilityStatus::numerical_failure)
    throw SynthesisError(SynthesisError::Reason::numerical_failure,
                         "LMI solver failed to converge after " +
                             std::to_string(solution.iterations) + " iterations");

  SynthesisResult r;
  r.variables = recover_variables(solution.x, assembly.layout);
  r.Q1 = lyapunov_q1(svd, r.variables.Q11, r.variables.Q22);
  r.W = compute_w(svd, r.variables.Q11, settings);
  r.w_condition = condition_number(r.W);
  if (!(r.w_condition <= settings.max_w_condition)) {
    std::ostringstream os;
    os << "W is ill-conditioned (condition number " << r.w_condition << ")";
    throw SynthesisError(SynthesisError::Reason::ill_conditioned_w, os.str());
  }
  r.gains.K = solve(r.W, r.variables.G, settings.singular_tol);
  r.gains.L = solve(r.variables.Q2, r.variables.H, settings.singular_tol);
  r.lmi_margin = solution.margin;
  r.solver_iterations = solution.iterations;

  const auto verdict = verify_gains(sys, r.gains, settings);
  r.oracle_rho = verdict.rho;
  r.certified = verdict.stable;
  return r;
}

}  // namespace resilient
