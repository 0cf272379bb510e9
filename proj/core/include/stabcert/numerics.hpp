#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"

namespace stabcert::numerics {

// Lower-triangular factor L with L L' = A. Throws NotSPD when a pivot is
// non-positive; throws std::invalid_argument when A is not symmetric within
// tol.symmetry_rel * max|A|.
Matrix cholesky(const Matrix& a, const Tolerances& tol = default_tolerances());

// Solve L x = b (forward) and L' x = b (backward) for lower-triangular L.
Vector forward_substitute(const Matrix& l, const Vector& b);
Vector backward_substitute_transposed(const Matrix& l, const Vector& b);

// Solve (L L') X = B column by column.
Matrix cholesky_solve(const Matrix& l, const Matrix& b);

struct LuFactors {
  Matrix lu;              // packed L (unit diagonal) and U
  std::vector<int> perm;  // row permutation
  int sign = 1;           // permutation sign
};

// LU with partial pivoting. Throws SingularLyapunov-agnostic
// std::runtime_error on exact singularity.
LuFactors lu_factor(const Matrix& a);
Vector lu_solve(const LuFactors& f, const Vector& b);
Matrix lu_inverse(const LuFactors& f);
// log|det| and sign, from the factorization.
std::pair<double, int> lu_logdet(const LuFactors& f);

struct EigResult {
  Vector values;   // ascending
  Matrix vectors;  // columns, orthonormal
};

// Full spectrum of a symmetric matrix: Householder reduction to tridiagonal
// form followed by implicit-shift QL sweeps (plane rotations), eigenvectors
// accumulated. Every eigenvalue is computed; nothing can be missed.
EigResult sym_eig(const Matrix& a, const Tolerances& tol = default_tolerances());

// Cyclic Jacobi rotations. Same contract as sym_eig; O(n^3) with a larger
// constant. Kept as an independent route for cross-checking.
EigResult sym_eig_jacobi(const Matrix& a, const Tolerances& tol = default_tolerances());

struct PencilEig {
  Vector values;   // ascending eigenvalues of (A, B)
  Vector smallest; // eigenvector of values.front(), normalized v' B v = 1
};

// Full spectrum of the symmetric-definite pencil (A, B): reduce via the
// Cholesky factor of B to a standard symmetric problem.
PencilEig sym_eig_pencil(const Matrix& a, const Matrix& b,
                         const Tolerances& tol = default_tolerances());

// Smallest eigenpair of the pencil (A, B), v normalized so v' B v = 1.
std::pair<double, Vector> sym_eig_smallest(const Matrix& a, const Matrix& b,
                                           const Tolerances& tol = default_tolerances());

// Solve T' P + P T = C for symmetric P. T must have its spectrum in the open
// right half-plane. Newton iteration for the matrix sign function with
// determinant scaling; a dense Kronecker solve is the fallback for
// n <= tol.lyapunov_kron_limit. Throws SingularLyapunov when the iteration
// cannot converge or the residual bound fails.
Matrix solve_lyapunov(const Matrix& t, const Matrix& c,
                      const Tolerances& tol = default_tolerances());

// Direct dense solve of the n^2 x n^2 Kronecker system. Exposed for
// cross-checking the sign-function route at small n.
Matrix solve_lyapunov_kronecker(const Matrix& t, const Matrix& c);

struct LeastSquares {
  Vector x;
  double residual = 0.0;  // ||A x - b||_2
  std::size_t rank = 0;
};

// Minimum-norm-ish least squares via column-pivoted Householder QR. rank is
// the number of diagonal entries of R above rank_rel_tol times the largest.
LeastSquares least_squares(const Matrix& a, const Vector& b, double rank_rel_tol);

// Numerical rank from the same pivoted QR.
std::size_t matrix_rank(const Matrix& a, double rank_rel_tol);

struct LinearConstraint {
  Vector a;  // a' y >= b
  double b = 0.0;
};

struct LpResult {
  double value = 0.0;
  Vector y;
};

// Global minimum of c' y subject to lower <= y <= upper and a' y >= b for
// every constraint. Two-phase dense simplex with Bland's rule; box bounds
// must be finite. Throws Infeasible when the region is empty.
LpResult solve_lp(const Vector& c, const Vector& lower, const Vector& upper,
                  const std::vector<LinearConstraint>& constraints,
                  const Tolerances& tol = default_tolerances());

} // namespace stabcert::numerics
