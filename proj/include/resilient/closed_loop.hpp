#pragma once

#include <vector>

#include "resilient/linalg.hpp"
#include "resilient/model.hpp"
#include "resilient/settings.hpp"

namespace resilient {

/// Augmented closed loop in ζ = (x, e), e = x − x̂:
///
///   ζ(k+1) = [Γ̄₁ + Σⱼ εⱼ(k)·Aⱼ + Σᵢ ηᵢ(k)·Sᵢ] ζ(k)
///
/// where εⱼ, ηᵢ are the zero-mean fluctuations of the actuator/sensor
/// effective gains, mutually independent and i.i.d. in time.
struct ClosedLoop {
  Matrix gamma1_mean;                          ///< 2n×2n
  std::vector<Matrix> actuator_channel_matrices;  ///< Aⱼ = [[B eⱼeⱼᵀK, −B eⱼeⱼᵀK], [0, 0]]
  std::vector<Matrix> sensor_channel_matrices;    ///< Sᵢ = [[0, 0], [−L eᵢeᵢᵀC, 0]]
  std::vector<double> actuator_variances;
  std::vector<double> sensor_variances;

  Index dimension() const { return gamma1_mean.rows(); }
};

ClosedLoop build_closed_loop(const AttackedSystem& sys, const Gains& gains,
                             const NumericSettings& settings = {});

/// Linear map on (2n)×(2n) matrices with vec(M⁺) = T·vec(M):
///   T = Γ̄₁⊗Γ̄₁ + Σⱼ varⱼ·Aⱼ⊗Aⱼ + Σᵢ varᵢ·Sᵢ⊗Sᵢ
class SecondMomentOperator {
 public:
  explicit SecondMomentOperator(const ClosedLoop& cl);

  const Matrix& matrix() const noexcept { return matrix_; }
  Index state_dimension() const noexcept { return dim_; }

  /// unvec(T·vec(M)).
  Matrix apply(const Matrix& second_moment) const;

 private:
  Index dim_;
  Matrix matrix_;
};

SecondMomentOperator second_moment_operator(const ClosedLoop& cl);

/// Direct one-step propagation Γ̄₁MΓ̄₁ᵀ + Σ var·EMEᵀ, without forming T.
Matrix propagate_second_moment(const ClosedLoop& cl, const Matrix& second_moment);

struct StabilityVerdict {
  bool stable = false;
  double rho = 0.0;  ///< spectral radius of T = per-step decay factor of E‖ζ‖²
};

/// Exponential mean-square stability: stable iff rho(T) < 1 − margin.
StabilityVerdict is_ms_stable(const SecondMomentOperator& op,
                              const NumericSettings& settings = {});

}  // namespace resilient
