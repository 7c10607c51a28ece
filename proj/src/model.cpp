#include "resilient/model.hpp"

#include <cmath>
#include <sstream>

namespace resilient {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

std::string join(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << "invalid system:";
  for (const auto& s : issues) os << "\n  - " << s;
  return os.str();
}

}  // namespace

std::string_view to_string(InjectionDistribution d) {
  switch (d) {
    case InjectionDistribution::constant: return "constant";
    case InjectionDistribution::uniform: return "uniform";
    case InjectionDistribution::gaussian: return "gaussian";
  }
  return "constant";
}

InjectionDistribution parse_distribution(std::string_view name) {
  if (name == "constant") return InjectionDistribution::constant;
  if (name == "uniform") return InjectionDistribution::uniform;
  if (name == "gaussian") return InjectionDistribution::gaussian;
  throw std::invalid_argument("unknown injection distribution '" + std::string(name) +
                              "' (expected constant, uniform or gaussian)");
}

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> channel_issues(const AttackChannel& ch, const std::string& label) {
  std::vector<std::string> issues;
  if (!std::isfinite(ch.bernoulli_mean) || ch.bernoulli_mean < 0.0 || ch.bernoulli_mean > 1.0)
    issues.push_back(label + ": bernoulli mean " + std::to_string(ch.bernoulli_mean) +
                     " outside [0, 1]");
  if (!std::isfinite(ch.injection_mean))
    issues.push_back(label + ": injection mean is not finite");
  if (!std::isfinite(ch.injection_variance) || ch.injection_variance < 0.0)
    issues.push_back(label + ": injection variance must be finite and nonnegative");
  else if (ch.injection_distribution == InjectionDistribution::constant &&
           ch.injection_variance != 0.0)
    issues.push_back(label + ": constant injection requires zero variance");
  return issues;
}

AttackedSystem validate(const AttackedSystem& sys, const NumericSettings& settings) {
  std::vector<std::string> issues;
  const auto& P = sys.plant;
  const Index n = P.A.rows();
  const Index m = P.B.cols();
  const Index p = P.C.rows();

  if (n < 1 || !P.A.is_square()) issues.push_back("A: must be square with n >= 1, got " + dims(P.A));
  if (m < 1 || P.B.rows() != n)
    issues.push_back("B: expected " + std::to_string(n) + "xm with m >= 1, got " + dims(P.B));
  if (p < 1 || P.C.cols() != n)
    issues.push_back("C: expected px" + std::to_string(n) + " with p >= 1, got " + dims(P.C));
  if (m > n) issues.push_back("B: more inputs (" + std::to_string(m) + ") than states (" +
                              std::to_string(n) + ")");

  if (issues.empty()) {
    const auto s = svd(P.B).singular;
    const double smax = s.empty() ? 0.0 : s.front();
    Index rank = 0;
    for (double v : s)
      if (smax > 0.0 && v > settings.rank_tol * smax) ++rank;
    if (rank < m)
      issues.push_back("B: not full column rank (rank " + std::to_string(rank) + " < m = " +
                       std::to_string(m) + ")");
  }

  if (static_cast<Index>(sys.sensor_channels.size()) != p)
    issues.push_back("sensors: " + std::to_string(sys.sensor_channels.size()) +
                     " channels for p = " + std::to_string(p) + " outputs");
  if (static_cast<Index>(sys.actuator_channels.size()) != m)
    issues.push_back("actuators: " + std::to_string(sys.actuator_channels.size()) +
                     " channels for m = " + std::to_string(m) + " inputs");

  for (std::size_t i = 0; i < sys.sensor_channels.size(); ++i)
    for (auto& s : channel_issues(sys.sensor_channels[i], "sensors[" + std::to_string(i) + "]"))
      issues.push_back(std::move(s));
  for (std::size_t j = 0; j < sys.actuator_channels.size(); ++j)
    for (auto& s : channel_issues(sys.actuator_channels[j], "actuators[" + std::to_string(j) + "]"))
      issues.push_back(std::move(s));

  if (!issues.empty()) throw ValidationError(std::move(issues));
  return sys;
}

void check_gain_dimensions(const PlantModel& plant, const Gains& gains) {
  std::vector<std::string> issues;
  const Index n = plant.states(), m = plant.inputs(), p = plant.outputs();
  if (gains.K.rows() != m || gains.K.cols() != n)
    issues.push_back("K: expected " + std::to_string(m) + "x" + std::to_string(n) + ", got " +
                     dims(gains.K));
  if (gains.L.rows() != n || gains.L.cols() != p)
    issues.push_back("L: expected " + std::to_string(n) + "x" + std::to_string(p) + ", got " +
                     dims(gains.L));
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

}  // namespace resilient
