#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resilient/linalg.hpp"
#include "resilient/settings.hpp"

namespace resilient {

/// x(k+1) = A x(k) + B u(k),  y(k) = C x(k).
struct PlantModel {
  Matrix A;  ///< n×n
  Matrix B;  ///< n×m
  Matrix C;  ///< p×n

  Index states() const { return A.rows(); }
  Index inputs() const { return B.cols(); }
  Index outputs() const { return C.rows(); }
};

enum class InjectionDistribution { constant, uniform, gaussian };

std::string_view to_string(InjectionDistribution d);
/// Throws std::invalid_argument for unknown names.
InjectionDistribution parse_distribution(std::string_view name);

/// Statistics of one attacked link. With probability `bernoulli_mean` the link
/// delivers the true signal; otherwise the signal is multiplied by an injected
/// factor with the given mean and variance.
///
/// The Bernoulli variance is not stored: it is always ᾱ(1 − ᾱ).
struct AttackChannel {
  double bernoulli_mean = 1.0;
  double injection_mean = 0.0;
  double injection_variance = 0.0;
  InjectionDistribution injection_distribution = InjectionDistribution::constant;

  friend bool operator==(const AttackChannel&, const AttackChannel&) = default;
};

struct AttackedSystem {
  PlantModel plant;
  std::vector<AttackChannel> sensor_channels;    ///< one per output (p)
  std::vector<AttackChannel> actuator_channels;  ///< one per input (m)
};

struct Gains {
  Matrix K;  ///< m×n controller gain, u = Δ₂ K x̂
  Matrix L;  ///< n×p observer gain
};

/// Collects every violated invariant, not just the first one.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Returns `sys` unchanged iff all invariants hold; throws ValidationError
/// listing each offending matrix or channel otherwise.
AttackedSystem validate(const AttackedSystem& sys, const NumericSettings& settings = {});

/// Channel-level checks, with `label` prefixed to each message
/// (e.g. "sensors[1]").
std::vector<std::string> channel_issues(const AttackChannel& ch, const std::string& label);

/// Throws ValidationError if the gains do not fit the plant.
void check_gain_dimensions(const PlantModel& plant, const Gains& gains);

}  // namespace resilient
