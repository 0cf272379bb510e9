#include "stabcert/affine_form.hpp"

#include <stdexcept>
#include <string>

#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"

namespace stabcert {

void AffineForm::validate(const Tolerances& tol) const {
  if (terms.empty()) throw std::invalid_argument("AffineForm: needs at least one term");
  if (theta_map.q() != terms.size())
    throw std::invalid_argument("AffineForm: theta arity " + std::to_string(theta_map.q()) +
                                " does not match " + std::to_string(terms.size()) + " terms");
  if (n == 0) throw std::invalid_argument("AffineForm: empty space");
  for (const Matrix& t : terms) {
    if (t.rows() != n || t.cols() != n)
      throw std::invalid_argument("AffineForm: term dimension mismatch");
    if (!all_finite(t)) throw std::invalid_argument("AffineForm: non-finite term entries");
  }
  if (x_norm.rows() != n || x_norm.cols() != n)
    throw std::invalid_argument("AffineForm: x_norm dimension mismatch");
  numerics::cholesky(x_norm, tol);  // throws NotSPD when invalid
  if (v_inner.has_value()) {
    if (v_inner->rows() != n || v_inner->cols() != n)
      throw std::invalid_argument("AffineForm: v_inner dimension mismatch");
    numerics::cholesky(*v_inner, tol);
  }
}

Matrix assemble(const AffineForm& form, const Vector& psi) {
  if (psi.size() != form.terms.size())
    throw std::invalid_argument("assemble: psi has dimension " + std::to_string(psi.size()) +
                                ", expected " + std::to_string(form.terms.size()));
  Matrix a(form.n, form.n);
  for (std::size_t q = 0; q < form.terms.size(); ++q) {
    const double w = psi[q];
    if (w == 0.0) continue;
    const Matrix& t = form.terms[q];
    for (std::size_t k = 0; k < a.data().size(); ++k)
      a.data()[k] += w * t.data()[k];
  }
  return a;
}

CoercivityResult alpha_theta(const AffineForm& form, const Vector& psi, const Tolerances& tol) {
  const Matrix s = symmetric_part(assemble(form, psi));
  auto [lambda, v] = numerics::sym_eig_smallest(s, form.x_norm, tol);
  CoercivityResult r;
  r.alpha = lambda;
  r.y_point.resize(form.q());
  for (std::size_t q = 0; q < form.q(); ++q)
    r.y_point[q] = quadratic_form(form.terms[q], v, v);
  r.eigvec = std::move(v);
  return r;
}

CoercivityResult alpha(const AffineForm& form, const Vector& mu, const Tolerances& tol) {
  return alpha_theta(form, form.theta_map.eval(mu), tol);
}

} // namespace stabcert
