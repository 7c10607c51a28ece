#include "resilient/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace resilient {

Matrix AffineLmi::evaluate(std::span<const double> x) const {
  if (x.size() != Fi.size())
    throw std::invalid_argument("AffineLmi::evaluate: expected " + std::to_string(Fi.size()) +
                                " variables, got " + std::to_string(x.size()));
  Eigen::MatrixXd out = F0.eigen();
  for (std::size_t i = 0; i < Fi.size(); ++i)
    if (x[i] != 0.0) out += x[i] * Fi[i].eigen();
  return Matrix(std::move(out));
}

double AffineLmi::scale() const {
  double s = 0.0;
  for (const auto& f : Fi) s = std::max(s, f.norm());
  return s;
}

std::string_view to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::feasible: return "feasible";
    case FeasibilityStatus::infeasible: return "infeasible";
    case FeasibilityStatus::numerical_failure: return "numerical_failure";
  }
  return "numerical_failure";
}

namespace {

constexpr double kBarrierGrowth = 10.0;
constexpr double kCenteringTol = 1e-10;   // Newton decrement λ²/2
// Newton decrement λ² below which a point that cannot make further progress in
// floating point still counts as centered; the gap bound is widened for it.
constexpr double kApproxCenterDecrement = 1e-2;
constexpr double kArmijo = 0.25;
constexpr double kMinStep = 1e-14;

// Barrier problem in scaled units: minimize τ·t − log det(tI − G(x)) − log(R² − ‖x‖²).
class BarrierProblem {
 public:
  BarrierProblem(const AffineLmi& lmi, double scale, double radius)
      : dim_(lmi.dimension()), nv_(static_cast<Index>(lmi.num_vars())), radius2_(radius * radius) {
    g0_ = lmi.F0.eigen() / scale;
    gi_.reserve(lmi.Fi.size());
    for (const auto& f : lmi.Fi) gi_.push_back(f.eigen() / scale);
  }

  Index num_vars() const { return nv_; }
  Index dimension() const { return dim_; }
  double barrier_parameter() const { return static_cast<double>(dim_) + 1.0; }

  Eigen::MatrixXd constraint(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd g = g0_;
    for (Index i = 0; i < nv_; ++i)
      if (x(i) != 0.0) g += x(i) * gi_[static_cast<std::size_t>(i)];
    return g;
  }

  // Barrier value at z = (x, t); nullopt outside the domain.
  std::optional<double> value(const Eigen::VectorXd& z, double tau) const {
    const Eigen::VectorXd x = z.head(nv_);
    const double t = z(nv_);
    const double ball = radius2_ - x.squaredNorm();
    if (!(ball > 0.0)) return std::nullopt;
    Eigen::MatrixXd s = t * Eigen::MatrixXd::Identity(dim_, dim_) - constraint(x);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return std::nullopt;
    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < dim_; ++i) {
      if (!(l(i, i) > 0.0)) return std::nullopt;
      logdet += 2.0 * std::log(l(i, i));
    }
    const double v = tau * t - logdet - std::log(ball);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  }

  // Gradient and Hessian of the barrier objective at a domain point.
  void derivatives(const Eigen::VectorXd& z, double tau, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const Index nz = nv_ + 1;
    const Eigen::VectorXd x = z.head(nv_);
    const double t = z(nv_);
    const Eigen::MatrixXd s = t * Eigen::MatrixXd::Identity(dim_, dim_) - constraint(x);
    const Eigen::MatrixXd sinv = s.llt().solve(Eigen::MatrixXd::Identity(dim_, dim_));

    // Columns hold vec(S⁻¹Gᵢ) and vec((S⁻¹Gᵢ)ᵀ); the t-direction uses −S⁻¹.
    const Index d2 = dim_ * dim_;
    Eigen::MatrixXd p(d2, nz), pt(d2, nz);
    for (Index i = 0; i < nz; ++i) {
      Eigen::MatrixXd pi = i < nv_ ? Eigen::MatrixXd(sinv * gi_[static_cast<std::size_t>(i)])
                                   : Eigen::MatrixXd(-sinv);
      p.col(i) = Eigen::Map<const Eigen::VectorXd>(pi.data(), d2);
      Eigen::MatrixXd pit = pi.transpose();
      pt.col(i) = Eigen::Map<const Eigen::VectorXd>(pit.data(), d2);
    }

    grad.resize(nz);
    for (Index i = 0; i < nz; ++i) {
      double tr = 0.0;
      for (Index a = 0; a < dim_; ++a) tr += p(a * dim_ + a, i);
      grad(i) = tr;
    }
    grad(nv_) += tau;
    hess = p.transpose() * pt;
    hess = 0.5 * (hess + hess.transpose()).eval();

    const double ball = radius2_ - x.squaredNorm();
    grad.head(nv_) += 2.0 * x / ball;
    hess.topLeftCorner(nv_, nv_) += (2.0 / ball) * Eigen::MatrixXd::Identity(nv_, nv_) +
                                    (4.0 / (ball * ball)) * x * x.transpose();
  }

 private:
  Index dim_;
  Index nv_;
  double radius2_;
  Eigen::MatrixXd g0_;
  std::vector<Eigen::MatrixXd> gi_;
};

enum class CenterOutcome { centered, stalled, out_of_iterations };

// On return `decrement` holds λ² at the final point.
CenterOutcome center(const BarrierProblem& prob, Eigen::VectorXd& z, double tau,
                     const NumericSettings& settings, int& iterations, double& decrement) {
  int stall = 0;
  decrement = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  auto f = prob.value(z, tau);
  if (!f) return CenterOutcome::stalled;
  while (true) {
    if (iterations >= settings.max_iter) return CenterOutcome::out_of_iterations;
    prob.derivatives(z, tau, grad, hess);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) return CenterOutcome::stalled;
    decrement = -grad.dot(step);
    if (decrement / 2.0 <= kCenteringTol) return CenterOutcome::centered;
    ++iterations;

    double alpha = 1.0;
    std::optional<double> trial;
    while (alpha >= kMinStep) {
      trial = prob.value(z + alpha * step, tau);
      if (trial && *trial <= *f - kArmijo * alpha * decrement) break;
      alpha *= 0.5;
    }
    if (alpha < kMinStep || !trial) {
      // Roundoff floor: no representable descent left.
      if (decrement <= kApproxCenterDecrement) return CenterOutcome::centered;
      if (++stall >= settings.max_stall) return CenterOutcome::stalled;
      continue;
    }
    const bool progress = *f - *trial > 1e-15 * std::max(1.0, std::abs(*f));
    stall = progress ? 0 : stall + 1;
    if (stall >= settings.max_stall)
      return decrement <= kApproxCenterDecrement ? CenterOutcome::centered : CenterOutcome::stalled;
    z += alpha * step;
    f = trial;
  }
}

FeasibilityResult constant_lmi(const AffineLmi& lmi, const NumericSettings& settings) {
  FeasibilityResult r;
  r.x.assign(lmi.num_vars(), 0.0);
  const double lmax = lambda_max(lmi.F0, settings.symmetry_tol);
  r.margin = -lmax;
  r.lower_bound = lmax;
  r.status = lmax < 0.0 ? FeasibilityStatus::feasible : FeasibilityStatus::infeasible;
  return r;
}

}  // namespace

FeasibilityResult solve_feasibility(const AffineLmi& lmi, const NumericSettings& settings) {
  const Index dim = lmi.dimension();
  if (dim < 1 || !lmi.F0.is_square()) throw std::invalid_argument("solve_feasibility: empty or non-square F0");
  auto asymmetric = [&](const Matrix& m) {
    return (m.eigen() - m.eigen().transpose()).cwiseAbs().maxCoeff() >
           settings.symmetry_tol * std::max(1.0, m.max_abs());
  };
  if (asymmetric(lmi.F0)) throw std::invalid_argument("solve_feasibility: F0 is not symmetric");
  for (std::size_t i = 0; i < lmi.Fi.size(); ++i) {
    if (lmi.Fi[i].rows() != dim || lmi.Fi[i].cols() != dim)
      throw std::invalid_argument("solve_feasibility: F" + std::to_string(i + 1) +
                                  " has the wrong dimension");
    if (asymmetric(lmi.Fi[i]))
      throw std::invalid_argument("solve_feasibility: F" + std::to_string(i + 1) +
                                  " is not symmetric");
  }

  const double scale = lmi.scale();
  if (scale == 0.0 || lmi.num_vars() == 0) return constant_lmi(lmi, settings);

  const BarrierProblem prob(lmi, scale, settings.variable_bound);
  const Index nv = prob.num_vars();
  const double nu = prob.barrier_parameter();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(nv + 1);
  z(nv) = lambda_max(Matrix(Eigen::MatrixXd(lmi.F0.eigen() / scale))) + 1.0;

  FeasibilityResult result;
  double tau = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  bool certified_infeasible = false;
  bool failed = false;
  while (true) {
    double decrement = 0.0;
    const auto outcome = center(prob, z, tau, settings, result.iterations, decrement);
    if (outcome != CenterOutcome::centered) {
      failed = true;
      break;
    }
    // Suboptimality of an approximately centered point with Newton decrement
    // λ < 1 is at most (ν + (λ + √ν)·λ/(1 − λ))/τ.
    const double lam = std::sqrt(std::max(0.0, decrement));
    const double gap = (nu + (lam + std::sqrt(nu)) * lam / (1.0 - lam)) / tau;
    lower = z(nv) - gap;
    // No point in the ball reaches the strict-feasibility threshold.
    if (lower >= -settings.eps_strict) {
      certified_infeasible = true;
      break;
    }
    if (gap <= settings.duality_tol) break;
    tau *= kBarrierGrowth;
  }

  result.x.assign(z.data(), z.data() + nv);
  const double lmax = lambda_max(lmi.evaluate(result.x), settings.symmetry_tol);
  result.margin = -lmax;
  result.lower_bound = lower * scale;
  if (failed) {
    // An iterate that is already strictly feasible is still a valid answer.
    result.status = lmax < -settings.eps_strict * scale ? FeasibilityStatus::feasible
                                                          : FeasibilityStatus::numerical_failure;
    return result;
  }
  if (certified_infeasible) {
    result.status = FeasibilityStatus::infeasible;
    return result;
  }
  result.status = lmax < -settings.eps_strict * scale ? FeasibilityStatus::feasible
                                                        : FeasibilityStatus::infeasible;
  return result;
}

}  // namespace resilient
