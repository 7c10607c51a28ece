#include "resilient/moments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace resilient {

ChannelMoments channel_moments(const AttackChannel& ch, const NumericSettings& settings) {
  const double a = ch.bernoulli_mean;
  const double b = ch.injection_mean;
  const double mean = a + (1.0 - a) * b;
  const double second = a + (1.0 - a) * (b * b + ch.injection_variance);
  double variance = second - mean * mean;
  if (variance < 0.0) {
    if (variance < -settings.negative_variance_tol)
      throw std::logic_error("channel_moments: negative variance " + std::to_string(variance));
    variance = 0.0;
  }
  return {mean, variance, std::sqrt(variance)};
}

DeltaMatrices delta_matrices(std::span<const AttackChannel> channels,
                             const NumericSettings& settings) {
  if (channels.empty()) throw std::invalid_argument("delta_matrices: empty channel list");
  std::vector<double> means, stds;
  means.reserve(channels.size());
  stds.reserve(channels.size());
  for (const auto& ch : channels) {
    const auto mom = channel_moments(ch, settings);
    means.push_back(mom.mean);
    stds.push_back(mom.std);
  }
  return {Matrix::diagonal(means), Matrix::diagonal(stds)};
}

}  // namespace resilient
