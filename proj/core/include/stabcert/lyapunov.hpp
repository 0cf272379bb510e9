#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stabcert/affine_form.hpp"
#include "stabcert/certify.hpp"
#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"

namespace stabcert::lyapunov {

// Certificate for the dynamical system <dy/dt, v>_V = -a(y, v; mu): a
// symmetric coercive P (the matrix of p(.,.)) anchored at mu*, plus the
// induced affine form phi(v, w; mu) = p(T_mu v, w) + p(v, T_mu w) whose
// coercivity at a parameter proves Lyapunov stability there.
struct LyapunovCertificate {
  Vector mu_star;
  Matrix p;
  AffineForm phi;   // same theta map as the source form; coercivity w.r.t. M_X
  double residual = 0.0;
};

// Supremizer T_mu = M_V^-1 A(Theta(mu)). Requires v_inner.
Matrix supremizer(const AffineForm& form, const Vector& mu,
                  const Tolerances& tol = default_tolerances());

// Solve T'P + PT = rhs (default 2 M_X) at the anchor, check P is SPD, and
// assemble phi with terms A_q' M_V^-1 P + P M_V^-1 A_q.
LyapunovCertificate build_p(const AffineForm& form, const Vector& mu_star,
                            const Tolerances& tol = default_tolerances());
LyapunovCertificate build_p(const AffineForm& form, const Vector& mu_star,
                            const Matrix& rhs, const Tolerances& tol);

// Certificate with a caller-supplied P (no Lyapunov solve). Covers the
// symmetric-coercive shortcut P = M_V, for which alpha_phi = 2 alpha.
LyapunovCertificate certificate_from_p(const AffineForm& form, const Vector& mu_star,
                                       const Matrix& p,
                                       const Tolerances& tol = default_tolerances());

// Coercivity constant of phi at mu, w.r.t. the X norm.
double phi_alpha(const LyapunovCertificate& cert, const Vector& mu,
                 const Tolerances& tol = default_tolerances());

enum class SymmetricVerdict { AsymptoticallyStable, Stable, Unstable };

const char* to_string(SymmetricVerdict v);

// For symmetric operators the sign of alpha(mu) decides stability directly.
// The +-1e-10 band around zero is reported as (marginally) Stable.
SymmetricVerdict symmetric_stability(const AffineForm& form, const Vector& mu,
                                     const Tolerances& tol = default_tolerances());

struct CoverageRow {
  Vector mu;
  double alpha = 0.0;
  std::vector<double> alpha_phi;
  bool covered = false;
};

struct HullCertificate {
  std::vector<Vector> mu_vertices;
  Vector alpha_values;   // alpha at the Theta-images of the vertices
  double bound = 0.0;    // hull_min_bound over the values
  bool proven = false;   // bound > 0: coercive on the whole hull
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  std::vector<std::size_t> uncovered;  // row indices
  std::vector<HullCertificate> hulls;
  bool fully_covered = false;
};

// Grid sweep over the domain: a point is covered when alpha or any
// certificate's alpha_phi is strictly positive. Grid coverage is sampled
// evidence; the optional hull vertex sets add proven regions via the
// convex-hull bound.
CoverageReport coverage_report(const AffineForm& form,
                               const std::vector<LyapunovCertificate>& certs,
                               const certify::ParameterBox& domain,
                               std::size_t resolution,
                               const std::vector<std::vector<Vector>>& hull_sets = {},
                               const Tolerances& tol = default_tolerances());

} // namespace stabcert::lyapunov
