#pragma once

namespace resilient {

// Numeric knobs shared by every module. Defaults are the documented ones;
// callers override individual fields.
struct NumericSettings {
  // linalg
  double symmetry_tol = 1e-9;
  double singular_tol = 1e-12;
  double rank_tol = 1e-10;  // relative to σmax

  // moments
  double negative_variance_tol = 1e-14;

  // stability oracle: stable iff rho < 1 - stability_margin
  double stability_margin = 1e-9;

  // sdp
  double eps_strict = 1e-8;     // relative to max ‖Fᵢ‖
  double duality_tol = 1e-7;    // relative to max ‖Fᵢ‖
  int max_iter = 500;           // total Newton steps
  int max_stall = 20;
  double variable_bound = 1e3;  // ‖x‖₂ ≤ variable_bound

  // synthesis
  double max_w_condition = 1e12;

  // simulator
  double divergence_threshold = 1e12;
};

}  // namespace resilient
