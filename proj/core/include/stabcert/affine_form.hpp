#pragma once

#include <optional>
#include <vector>

#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"
#include "stabcert/theta.hpp"

namespace stabcert {

// Affinely decomposed bilinear operator a(v, w; mu) = sum_q Theta_q(mu) a_q(v, w)
// together with the X-norm matrix (SPD) and an optional V inner product.
// Term matrices are stored unsymmetrized; the coercivity quotient only sees
// the symmetric part, which is taken at evaluation time.
struct AffineForm {
  std::vector<Matrix> terms;
  theta::ThetaMap theta_map;
  Matrix x_norm;
  std::optional<Matrix> v_inner;
  std::size_t n = 0;

  std::size_t q() const { return terms.size(); }

  // Checks dimensions, SPD-ness of the norms, and theta arity. Throws on
  // violation (NotSPD for the norm matrices).
  void validate(const Tolerances& tol = default_tolerances()) const;
};

struct CoercivityResult {
  double alpha = 0.0;
  Vector eigvec;   // minimizer v with v' M_X v = 1
  Vector y_point;  // y_q = v' sym(A_q) v
};

// A(psi) = sum_q psi_q A_q.
Matrix assemble(const AffineForm& form, const Vector& psi);

// alpha_Theta(psi): smallest eigenvalue of the pencil (sym(A(psi)), M_X),
// with the minimizer and its y-point.
CoercivityResult alpha_theta(const AffineForm& form, const Vector& psi,
                             const Tolerances& tol = default_tolerances());

// alpha(mu) = alpha_Theta(Theta(mu)).
CoercivityResult alpha(const AffineForm& form, const Vector& mu,
                       const Tolerances& tol = default_tolerances());

} // namespace stabcert
