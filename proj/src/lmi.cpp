#include "resilient/lmi.hpp"

#include <stdexcept>

#include "resilient/moments.hpp"

namespace resilient {

SvdStructure svd_structure(const Matrix& B, const NumericSettings& settings) {
  const Index n = B.rows();
  const Index m = B.cols();
  if (m < 1 || n < m)
    throw ValidationError({"B: svd structure needs n >= m >= 1, got " + std::to_string(n) + "x" +
                           std::to_string(m)});
  auto [U, s, V] = svd(B);
  if (s.front() <= 0.0 || s.back() <= settings.rank_tol * s.front())
    throw ValidationError({"B: not full column rank"});

  Eigen::MatrixXd u = U.eigen();
  Eigen::MatrixXd v = V.eigen();
  for (Index j = 0; j < n; ++j) {
    Index first = 0;
    while (first < n && std::abs(u(first, j)) <= 1e-14) ++first;
    if (first < n && u(first, j) < 0.0) {
      u.col(j) *= -1.0;
      if (j < m) v.col(j) *= -1.0;
    }
  }
  return {Matrix(std::move(u)), Matrix::diagonal(s), Matrix(std::move(v))};
}

Matrix lyapunov_q1(const SvdStructure& svd, const Matrix& Q11, const Matrix& Q22) {
  return symmetrize(svd.U * block_diagonal({Q11, Q22}) * svd.U.transpose());
}

namespace {

std::size_t sym_count(Index k) { return static_cast<std::size_t>(k * (k + 1) / 2); }

void pack_symmetric(const Matrix& q, std::vector<double>& out) {
  for (Index i = 0; i < q.rows(); ++i)
    for (Index j = i; j < q.cols(); ++j) out.push_back(q(i, j));
}

void pack_full(const Matrix& q, std::vector<double>& out) {
  for (Index i = 0; i < q.rows(); ++i)
    for (Index j = 0; j < q.cols(); ++j) out.push_back(q(i, j));
}

Matrix unpack_symmetric(std::span<const double> x, Index k) {
  Eigen::MatrixXd q(k, k);
  std::size_t idx = 0;
  for (Index i = 0; i < k; ++i)
    for (Index j = i; j < k; ++j) q(i, j) = q(j, i) = x[idx++];
  return Matrix(std::move(q));
}

}  // namespace

VariableLayout::VariableLayout(Index n, Index m, Index p) : n_(n), m_(m), p_(p) {
  if (n < 1 || m < 1 || p < 1 || m > n) throw std::invalid_argument("VariableLayout: bad dimensions");
  q11_ = 0;
  q22_ = q11_ + sym_count(m);
  q2_ = q22_ + sym_count(n - m);
  g_ = q2_ + sym_count(n);
  h_ = g_ + static_cast<std::size_t>(m * n);
  total_ = h_ + static_cast<std::size_t>(n * p);
}

std::vector<double> VariableLayout::pack(const SynthesisVariables& v) const {
  if (v.Q11.rows() != m_ || v.Q22.rows() != n_ - m_ || v.Q2.rows() != n_ || v.G.rows() != m_ ||
      v.G.cols() != n_ || v.H.rows() != n_ || v.H.cols() != p_)
    throw std::invalid_argument("VariableLayout::pack: dimension mismatch");
  std::vector<double> x;
  x.reserve(total_);
  pack_symmetric(v.Q11, x);
  pack_symmetric(v.Q22, x);
  pack_symmetric(v.Q2, x);
  pack_full(v.G, x);
  pack_full(v.H, x);
  return x;
}

SynthesisVariables VariableLayout::unpack(std::span<const double> x) const {
  if (x.size() != total_)
    throw std::invalid_argument("VariableLayout::unpack: expected " + std::to_string(total_) +
                                " values, got " + std::to_string(x.size()));
  return {unpack_symmetric(x.subspan(q11_, q22_ - q11_), m_),
          unpack_symmetric(x.subspan(q22_, q2_ - q22_), n_ - m_),
          unpack_symmetric(x.subspan(q2_, g_ - q2_), n_),
          Matrix::from_row_major(m_, n_, x.subspan(g_, h_ - g_)),
          Matrix::from_row_major(n_, p_, x.subspan(h_, total_ - h_))};
}

Matrix synthesis_lmi_matrix(const AttackedSystem& sys, const SvdStructure& svd,
                            const SynthesisVariables& v, const NumericSettings& settings) {
  const auto& [A, B, C] = sys.plant;
  const Index n = sys.plant.states();
  const auto sensors = delta_matrices(sys.sensor_channels, settings);
  const auto actuators = delta_matrices(sys.actuator_channels, settings);

  const Matrix Q1 = lyapunov_q1(svd, v.Q11, v.Q22);
  const Matrix Q = block_diagonal({Q1, v.Q2});
  const Matrix zero_n = Matrix::zeros(n, n);
  const Matrix zero_2n = Matrix::zeros(2 * n, 2 * n);

  const Matrix BDG = B * actuators.mean_diag * v.G;
  const Matrix sigma1 = block_matrix({{Q1 * A + BDG, -BDG},
                                      {zero_n, v.Q2 * A - v.H * sensors.mean_diag * C}});
  const Matrix BSG = B * actuators.std_diag * v.G;
  const Matrix sigma2 = block_matrix({{BSG, BSG}, {-(v.H * sensors.std_diag * C), zero_n}});

  const Matrix main = block_matrix({{-Q, sigma1.transpose(), sigma2.transpose()},
                                    {sigma1, -Q, zero_2n},
                                    {sigma2, zero_2n, -Q}});
  return block_diagonal({main, -v.Q11, -v.Q22, -v.Q2});
}

LmiAssembly assemble(const AttackedSystem& sys, const SvdStructure& svd,
                     const NumericSettings& settings) {
  const Index n = sys.plant.states(), m = sys.plant.inputs(), p = sys.plant.outputs();
  if (svd.states() != n || svd.inputs() != m)
    throw std::invalid_argument("assemble: svd structure does not match the plant");
  VariableLayout layout(n, m, p);

  // The LMI has no constant term; each coefficient matrix is the LMI
  // evaluated at a unit vector in the packed variables.
  std::vector<double> x(layout.num_vars(), 0.0);
  AffineLmi lmi;
  lmi.F0 = synthesis_lmi_matrix(sys, svd, layout.unpack(x), settings);
  lmi.Fi.reserve(layout.num_vars());
  for (std::size_t i = 0; i < layout.num_vars(); ++i) {
    x[i] = 1.0;
    lmi.Fi.push_back(synthesis_lmi_matrix(sys, svd, layout.unpack(x), settings) - lmi.F0);
    x[i] = 0.0;
  }
  return {std::move(lmi), layout, svd, 6 * n};
}

SynthesisVariables recover_variables(std::span<const double> x, const VariableLayout& layout) {
  return layout.unpack(x);
}

}  // namespace resilient
