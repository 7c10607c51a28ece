#pragma once

#include <span>

#include "resilient/linalg.hpp"
#include "resilient/model.hpp"
#include "resilient/settings.hpp"

namespace resilient {

/// Moments of the effective gain Δ = Π_a + Π_b − Π_a·Π_b of one channel.
///
/// With α Bernoulli(ᾱ) independent of the injection β, Δ = α + (1 − α)β
/// exactly, so
///   E[Δ]   = ᾱ + (1 − ᾱ)β̄
///   Var[Δ] = ᾱ + (1 − ᾱ)(β̄² + σβ²) − E[Δ]²
/// using α² = α and α(1 − α) = 0.
struct ChannelMoments {
  double mean = 1.0;
  double variance = 0.0;
  double std = 0.0;
};

ChannelMoments channel_moments(const AttackChannel& ch, const NumericSettings& settings = {});

struct DeltaMatrices {
  Matrix mean_diag;  ///< diag(E[Δᵢ])
  Matrix std_diag;   ///< diag(√Var[Δᵢ])
};

/// Per-channel moments laid out as diagonal matrices in channel order.
DeltaMatrices delta_matrices(std::span<const AttackChannel> channels,
                             const NumericSettings& settings = {});

}  // namespace resilient
