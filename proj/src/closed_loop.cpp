#include "resilient/closed_loop.hpp"

#include "resilient/moments.hpp"

namespace resilient {

namespace {

Matrix unit_selector(Index size, Index i) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(size, size);
  e(i, i) = 1.0;
  return Matrix(std::move(e));
}

}  // namespace

ClosedLoop build_closed_loop(const AttackedSystem& sys, const Gains& gains,
                             const NumericSettings& settings) {
  check_gain_dimensions(sys.plant, gains);
  const auto& [A, B, C] = sys.plant;
  const Index n = sys.plant.states();
  const Index m = sys.plant.inputs();
  const Index p = sys.plant.outputs();
  if (static_cast<Index>(sys.sensor_channels.size()) != p ||
      static_cast<Index>(sys.actuator_channels.size()) != m)
    throw ValidationError({"channel count does not match plant dimensions"});

  const auto sensors = delta_matrices(sys.sensor_channels, settings);
  const auto actuators = delta_matrices(sys.actuator_channels, settings);
  const Matrix zero = Matrix::zeros(n, n);

  const Matrix BDK = B * actuators.mean_diag * gains.K;
  ClosedLoop cl;
  cl.gamma1_mean = block_matrix({{A + BDK, -BDK},
                                 {zero, A - gains.L * sensors.mean_diag * C}});

  for (Index j = 0; j < m; ++j) {
    const Matrix BEK = B * unit_selector(m, j) * gains.K;
    cl.actuator_channel_matrices.push_back(block_matrix({{BEK, -BEK}, {zero, zero}}));
    cl.actuator_variances.push_back(channel_moments(sys.actuator_channels[j], settings).variance);
  }
  for (Index i = 0; i < p; ++i) {
    const Matrix LEC = gains.L * unit_selector(p, i) * C;
    cl.sensor_channel_matrices.push_back(block_matrix({{zero, zero}, {-LEC, zero}}));
    cl.sensor_variances.push_back(channel_moments(sys.sensor_channels[i], settings).variance);
  }
  return cl;
}

SecondMomentOperator::SecondMomentOperator(const ClosedLoop& cl) : dim_(cl.dimension()) {
  Eigen::MatrixXd t = kron(cl.gamma1_mean, cl.gamma1_mean).eigen();
  auto add = [&t](const Matrix& e, double var) {
    if (var != 0.0) t += var * kron(e, e).eigen();
  };
  for (std::size_t j = 0; j < cl.actuator_channel_matrices.size(); ++j)
    add(cl.actuator_channel_matrices[j], cl.actuator_variances[j]);
  for (std::size_t i = 0; i < cl.sensor_channel_matrices.size(); ++i)
    add(cl.sensor_channel_matrices[i], cl.sensor_variances[i]);
  matrix_ = Matrix(std::move(t));
}

Matrix SecondMomentOperator::apply(const Matrix& second_moment) const {
  return unvec(matrix_ * vec(second_moment), dim_, dim_);
}

SecondMomentOperator second_moment_operator(const ClosedLoop& cl) {
  return SecondMomentOperator(cl);
}

Matrix propagate_second_moment(const ClosedLoop& cl, const Matrix& M) {
  Matrix next = cl.gamma1_mean * M * cl.gamma1_mean.transpose();
  for (std::size_t j = 0; j < cl.actuator_channel_matrices.size(); ++j) {
    const auto& E = cl.actuator_channel_matrices[j];
    next += cl.actuator_variances[j] * (E * M * E.transpose());
  }
  for (std::size_t i = 0; i < cl.sensor_channel_matrices.size(); ++i) {
    const auto& E = cl.sensor_channel_matrices[i];
    next += cl.sensor_variances[i] * (E * M * E.transpose());
  }
  return next;
}

StabilityVerdict is_ms_stable(const SecondMomentOperator& op, const NumericSettings& settings) {
  const double rho = spectral_radius(op.matrix());
  return {rho < 1.0 - settings.stability_margin, rho};
}

}  // namespace resilient
