#pragma once

#include <stdexcept>
#include <string>

#include "resilient/closed_loop.hpp"
#include "resilient/lmi.hpp"
#include "resilient/model.hpp"
#include "resilient/sdp.hpp"
#include "resilient/settings.hpp"

namespace resilient {

struct SynthesisResult {
  Gains gains;
  SynthesisVariables variables;
  Matrix Q1;
  Matrix W;
  double w_condition = 0.0;
  double lmi_margin = 0.0;
  double oracle_rho = 0.0;
  bool certified = false;  ///< oracle_rho < 1 (with the stability margin)
  int solver_iterations = 0;
};

class SynthesisError : public std::runtime_error {
 public:
  enum class Reason { infeasible, numerical_failure, ill_conditioned_w };

  SynthesisError(Reason reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// W = (B0·Vᵀ)⁻¹·Q11·B0·Vᵀ, the matrix with B·W = Q1·B.
Matrix compute_w(const SvdStructure& svd, const Matrix& Q11, const NumericSettings& settings = {});

/// Solves the synthesis LMI, recovers K = W⁻¹G and L = Q2⁻¹H, and certifies
/// the gains with the second-moment oracle. A feasible LMI whose gains fail
/// the oracle still returns, with `certified == false`.
SynthesisResult synthesize(const AttackedSystem& sys, const NumericSettings& settings = {});

/// Mean-square stability of the closed loop formed by `gains`, however they
/// were obtained.
StabilityVerdict verify_gains(const AttackedSystem& sys, const Gains& gains,
                              const NumericSettings& settings = {});

}  // namespace resilient
