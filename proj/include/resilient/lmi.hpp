#pragma once

#include <span>
#include <vector>

#include "resilient/linalg.hpp"
#include "resilient/model.hpp"
#include "resilient/sdp.hpp"
#include "resilient/settings.hpp"

namespace resilient {

/// B = U · [B0; 0] · Vᵀ with B0 diagonal positive (descending).
struct SvdStructure {
  Matrix U;   ///< n×n orthonormal
  Matrix B0;  ///< m×m diagonal
  Matrix V;   ///< m×m orthonormal

  Index states() const { return U.rows(); }
  Index inputs() const { return B0.rows(); }
};

/// Requires full column rank and n ≥ m. Columns of U are sign-normalized so
/// their first nonzero entry is nonnegative (V follows for the first m).
SvdStructure svd_structure(const Matrix& B, const NumericSettings& settings = {});

/// Q1 = U·diag(Q11, Q22)·Uᵀ, exactly symmetric.
Matrix lyapunov_q1(const SvdStructure& svd, const Matrix& Q11, const Matrix& Q22);

struct SynthesisVariables {
  Matrix Q11;  ///< m×m symmetric
  Matrix Q22;  ///< (n−m)×(n−m) symmetric
  Matrix Q2;   ///< n×n symmetric
  Matrix G;    ///< m×n
  Matrix H;    ///< n×p
};

/// Packing order: Q11 upper triangle row-major, Q22 likewise, Q2 likewise,
/// then G and H row-major.
class VariableLayout {
 public:
  VariableLayout(Index n, Index m, Index p);

  std::size_t num_vars() const { return total_; }
  Index states() const { return n_; }
  Index inputs() const { return m_; }
  Index outputs() const { return p_; }

  std::vector<double> pack(const SynthesisVariables& vars) const;
  SynthesisVariables unpack(std::span<const double> x) const;

 private:
  Index n_, m_, p_;
  std::size_t q11_, q22_, q2_, g_, h_, total_;
};

struct LmiAssembly {
  AffineLmi lmi;
  VariableLayout layout;
  SvdStructure svd;
  /// Size of the main [[−Q, *, *], [Σ1, −Q, *], [Σ2, 0, −Q]] block (6n);
  /// the positivity blocks −Q11, −Q22, −Q2 follow it on the diagonal.
  Index main_block = 0;
};

/// The synthesis LMI evaluated at concrete variables (any values, feasible or
/// not). Every entry is linear in the variables.
Matrix synthesis_lmi_matrix(const AttackedSystem& sys, const SvdStructure& svd,
                            const SynthesisVariables& vars, const NumericSettings& settings = {});

LmiAssembly assemble(const AttackedSystem& sys, const SvdStructure& svd,
                     const NumericSettings& settings = {});

/// Named matrices for a solver vector.
SynthesisVariables recover_variables(std::span<const double> x, const VariableLayout& layout);

}  // namespace resilient
