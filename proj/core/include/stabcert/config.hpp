#pragma once

#include <cstddef>

namespace stabcert {

// All numerical tolerances in one place. The defaults are the contract the
// tests pin down; callers can tighten or relax individual knobs.
struct Tolerances {
  // Symmetry check relative to max|A| before factorizations.
  double symmetry_rel = 1e-12;
  // Cholesky reconstruction guarantee, relative Frobenius.
  double cholesky_residual_rel = 1e-10;
  // Generalized eigensolve residual: ||Av - lambda Bv|| <= eig_residual_rel * (||A|| + |lambda| ||B||).
  double eig_residual_rel = 1e-8;
  // Lyapunov solve: ||T'P + PT - C||_F <= lyapunov_residual_rel * ||C||_F.
  double lyapunov_residual_rel = 1e-8;
  // Newton iteration cap for the matrix sign function.
  int lyapunov_max_iter = 100;
  // Dimension cap for the dense Kronecker-system fallback.
  int lyapunov_kron_limit = 80;
  // Barycentric reconstruction residual, relative to the simplex scale.
  double barycentric_residual_rel = 1e-9;
  // Coefficients >= -inside_tol count as inside the simplex.
  double inside_tol = 1e-12;
  // Rank tolerance for the vertex-difference matrix.
  double simplex_rank_rel = 1e-10;
  // LP pivot/feasibility tolerances.
  double lp_pivot_tol = 1e-11;
  double lp_feas_tol = 1e-9;
  // Upper-bound bank capacity (furthest-point eviction beyond this).
  std::size_t y_bank_cap = 512;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

} // namespace stabcert
