#include "stabcert/lyapunov.hpp"

#include <cmath>
#include <stdexcept>

#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"
#include "stabcert/parallel.hpp"

namespace stabcert::lyapunov {

Matrix supremizer(const AffineForm& form, const Vector& mu, const Tolerances& tol) {
  if (!form.v_inner.has_value())
    throw MissingVInner("supremizer: the operator has no V inner product");
  const Matrix a = assemble(form, form.theta_map.eval(mu));
  const Matrix l = numerics::cholesky(*form.v_inner, tol);
  return numerics::cholesky_solve(l, a);
}

namespace {

AffineForm build_phi(const AffineForm& form, const Matrix& p, const Tolerances& tol) {
  const Matrix l = numerics::cholesky(*form.v_inner, tol);
  AffineForm phi;
  phi.n = form.n;
  phi.theta_map = form.theta_map;
  phi.x_norm = form.x_norm;
  phi.terms.reserve(form.q());
  for (const Matrix& a_q : form.terms) {
    const Matrix t_q = numerics::cholesky_solve(l, a_q);  // M_V^-1 A_q
    Matrix term = matmul(p, t_q);
    term += transpose(term);
    phi.terms.push_back(symmetric_part(term));
  }
  return phi;
}

double certificate_residual(const AffineForm& form, const Vector& mu_star, const Matrix& p,
                            const Matrix& rhs, const Tolerances& tol) {
  const Matrix t = supremizer(form, mu_star, tol);
  Matrix r = matmul(transpose(t), p);
  r += matmul(p, t);
  r -= rhs;
  const double scale = frobenius_norm(rhs);
  return frobenius_norm(r) / (scale > 0.0 ? scale : 1.0);
}

} // namespace

LyapunovCertificate build_p(const AffineForm& form, const Vector& mu_star,
                            const Matrix& rhs, const Tolerances& tol) {
  if (!form.v_inner.has_value())
    throw MissingVInner("build_p: the operator has no V inner product");
  const Matrix t = supremizer(form, mu_star, tol);
  const Matrix p = numerics::solve_lyapunov(t, rhs, tol);
  try {
    numerics::cholesky(p, tol);
  } catch (const NotSPD&) {
    throw NotSPD("build_p: the Lyapunov solution is not SPD; the system is not "
                 "exponentially stable at the anchor");
  }
  LyapunovCertificate cert;
  cert.mu_star = mu_star;
  cert.p = p;
  cert.phi = build_phi(form, p, tol);
  cert.residual = certificate_residual(form, mu_star, p, rhs, tol);
  return cert;
}

LyapunovCertificate build_p(const AffineForm& form, const Vector& mu_star,
                            const Tolerances& tol) {
  Matrix rhs = form.x_norm;
  rhs *= 2.0;
  return build_p(form, mu_star, rhs, tol);
}

LyapunovCertificate certificate_from_p(const AffineForm& form, const Vector& mu_star,
                                       const Matrix& p, const Tolerances& tol) {
  if (!form.v_inner.has_value())
    throw MissingVInner("certificate_from_p: the operator has no V inner product");
  numerics::cholesky(p, tol);  // P must be SPD
  LyapunovCertificate cert;
  cert.mu_star = mu_star;
  cert.p = p;
  cert.phi = build_phi(form, p, tol);
  cert.residual = 0.0;  // nothing was solved; phi is exact for this P
  return cert;
}

double phi_alpha(const LyapunovCertificate& cert, const Vector& mu, const Tolerances& tol) {
  return alpha(cert.phi, mu, tol).alpha;
}

const char* to_string(SymmetricVerdict v) {
  switch (v) {
    case SymmetricVerdict::AsymptoticallyStable: return "asymptotically_stable";
    case SymmetricVerdict::Stable: return "stable";
    case SymmetricVerdict::Unstable: return "unstable";
  }
  return "unstable";
}

SymmetricVerdict symmetric_stability(const AffineForm& form, const Vector& mu,
                                     const Tolerances& tol) {
  const Matrix a = assemble(form, form.theta_map.eval(mu));
  if (!is_symmetric(a, tol.symmetry_rel))
    throw NotSymmetric("symmetric_stability: A(mu) is not symmetric; "
                       "use a Lyapunov certificate instead");
  const double value = alpha(form, mu, tol).alpha;
  constexpr double band = 1e-10;
  if (value > band) return SymmetricVerdict::AsymptoticallyStable;
  if (value >= -band) return SymmetricVerdict::Stable;
  return SymmetricVerdict::Unstable;
}

CoverageReport coverage_report(const AffineForm& form,
                               const std::vector<LyapunovCertificate>& certs,
                               const certify::ParameterBox& domain, std::size_t resolution,
                               const std::vector<std::vector<Vector>>& hull_sets,
                               const Tolerances& tol) {
  domain.validate();
  if (resolution < 2) resolution = 2;

  // Tensor grid; degenerate coordinates contribute a single value.
  std::vector<Vector> grid_axes;
  for (const certify::Interval& iv : domain.intervals) {
    Vector axis;
    if (iv.degenerate()) {
      axis.push_back(iv.lo);
    } else {
      for (std::size_t k = 0; k < resolution; ++k)
        axis.push_back(iv.lo + (iv.hi - iv.lo) *
                                   (static_cast<double>(k) / static_cast<double>(resolution - 1)));
    }
    grid_axes.push_back(std::move(axis));
  }
  std::vector<Vector> grid{{}};
  for (const Vector& axis : grid_axes) {
    std::vector<Vector> next;
    next.reserve(grid.size() * axis.size());
    for (const Vector& prefix : grid) {
      for (double v : axis) {
        Vector mu = prefix;
        mu.push_back(v);
        next.push_back(std::move(mu));
      }
    }
    grid = std::move(next);
  }

  CoverageReport report;
  report.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    CoverageRow row;
    row.mu = grid[i];
    row.alpha = alpha(form, grid[i], tol).alpha;
    row.alpha_phi.reserve(certs.size());
    bool covered = row.alpha > 0.0;
    for (const LyapunovCertificate& cert : certs) {
      const double v = phi_alpha(cert, grid[i], tol);
      row.alpha_phi.push_back(v);
      covered = covered || v > 0.0;
    }
    row.covered = covered;
    report.rows[i] = std::move(row);
  });
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    if (!report.rows[i].covered) report.uncovered.push_back(i);
  report.fully_covered = report.uncovered.empty();

  for (const std::vector<Vector>& mu_vertices : hull_sets) {
    HullCertificate hull;
    hull.mu_vertices = mu_vertices;
    for (const Vector& mu : mu_vertices)
      hull.alpha_values.push_back(alpha(form, mu, tol).alpha);
    hull.bound = bounds::hull_min_bound(hull.alpha_values);
    hull.proven = hull.bound > 0.0;
    report.hulls.push_back(std::move(hull));
  }
  return report;
}

} // namespace stabcert::lyapunov
