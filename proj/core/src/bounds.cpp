#include "stabcert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"

namespace stabcert::bounds {

namespace {

// Columns are vertex differences eta^i - eta^1, i = 2..m.
Matrix difference_matrix(const std::vector<Vector>& vertices) {
  const std::size_t q = vertices.front().size();
  const std::size_t m = vertices.size();
  Matrix d(q, m - 1);
  for (std::size_t j = 1; j < m; ++j)
    for (std::size_t i = 0; i < q; ++i)
      d(i, j - 1) = vertices[j][i] - vertices[0][i];
  return d;
}

double simplex_scale(const std::vector<Vector>& vertices, const Vector& psi) {
  double scale = 1.0;
  for (std::size_t j = 1; j < vertices.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < vertices[j].size(); ++i) {
      const double d = vertices[j][i] - vertices[0][i];
      s += d * d;
    }
    scale = std::max(scale, std::sqrt(s));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double d = psi[i] - vertices[0][i];
    s += d * d;
  }
  return std::max(scale, std::sqrt(s));
}

} // namespace

Simplex::Simplex(std::vector<Vector> vertices, Vector values,
                 std::vector<Vector> y_points, const Tolerances& tol)
    : vertices_(std::move(vertices)), values_(std::move(values)), y_points_(std::move(y_points)) {
  if (vertices_.empty()) throw EmptyInput("Simplex: no vertices");
  const std::size_t q = vertices_.front().size();
  const std::size_t m = vertices_.size();
  if (q == 0) throw std::invalid_argument("Simplex: zero-dimensional ambient space");
  if (m > q + 1)
    throw std::invalid_argument("Simplex: more than Q+1 vertices");
  for (const Vector& v : vertices_)
    if (v.size() != q) throw std::invalid_argument("Simplex: inconsistent vertex dimensions");
  if (values_.size() != m)
    throw std::invalid_argument("Simplex: values not aligned with vertices");
  if (!y_points_.empty() && y_points_.size() != m)
    throw std::invalid_argument("Simplex: y_points not aligned with vertices");
  if (m > 1) {
    const std::size_t rank = numerics::matrix_rank(difference_matrix(vertices_), tol.simplex_rank_rel);
    if (rank != m - 1)
      throw DegenerateSimplex("Simplex: affine hull has dimension " + std::to_string(rank) +
                              ", expected " + std::to_string(m - 1));
  }
}

Vector Simplex::centroid() const {
  Vector c(ambient_dim(), 0.0);
  for (const Vector& v : vertices_) axpy(1.0, v, c);
  const double inv = 1.0 / static_cast<double>(size());
  for (double& x : c) x *= inv;
  return c;
}

bool Barycentric::inside(double inside_tol) const {
  for (double c : coefficients)
    if (c < -inside_tol) return false;
  return true;
}

bool Barycentric::strictly_inside(double inside_tol) const {
  for (double c : coefficients)
    if (c <= inside_tol) return false;
  return true;
}

Barycentric barycentric(const Simplex& s, const Vector& psi, const Tolerances& tol) {
  if (psi.size() != s.ambient_dim())
    throw std::invalid_argument("barycentric: psi dimension mismatch");
  const std::size_t m = s.size();
  const double scale = simplex_scale(s.vertices(), psi);
  if (m == 1) {
    double dist = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double d = psi[i] - s.vertices()[0][i];
      dist += d * d;
    }
    if (std::sqrt(dist) > tol.barycentric_residual_rel * scale)
      throw NotInAffineHull("barycentric: point does not coincide with a single-vertex simplex");
    return Barycentric{{1.0}};
  }
  Vector r(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) r[i] = psi[i] - s.vertices()[0][i];
  const numerics::LeastSquares ls =
      numerics::least_squares(difference_matrix(s.vertices()), r, tol.simplex_rank_rel);
  if (ls.rank < m - 1)
    throw DegenerateSimplex("barycentric: simplex is degenerate");
  if (ls.residual > tol.barycentric_residual_rel * scale)
    throw NotInAffineHull("barycentric: point is off the affine hull (residual " +
                          std::to_string(ls.residual) + ")");
  Barycentric bc;
  bc.coefficients.resize(m);
  double sum = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    bc.coefficients[j] = ls.x[j - 1];
    sum += ls.x[j - 1];
  }
  bc.coefficients[0] = 1.0 - sum;
  return bc;
}

double interp_lower_bound(const Simplex& s, const Vector& psi, const Tolerances& tol) {
  const Barycentric bc = barycentric(s, psi, tol);
  if (!bc.inside(tol.inside_tol))
    throw OutsideSimplex("interp_lower_bound: psi is outside the simplex");
  double bound = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) bound += bc.coefficients[i] * s.values()[i];
  return bound;
}

double hull_min_bound(const Vector& values) {
  if (values.empty()) throw EmptyInput("hull_min_bound: no values");
  return *std::min_element(values.begin(), values.end());
}

double extrapolate_upper_bound(const Simplex& s, const Vector& psi, const Tolerances& tol) {
  const Barycentric bc = barycentric(s, psi, tol);
  if (bc.strictly_inside(tol.inside_tol))
    throw InsideSimplex("extrapolate_upper_bound: psi is strictly inside; use interp_lower_bound");
  double bound = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) bound += bc.coefficients[i] * s.values()[i];
  return bound;
}

double ypoint_upper_bound(const Vector& psi, const std::vector<Vector>& bank) {
  if (bank.empty()) throw EmptyInput("ypoint_upper_bound: empty bank");
  double best = dot(psi, bank.front());
  for (std::size_t i = 1; i < bank.size(); ++i)
    best = std::min(best, dot(psi, bank[i]));
  return best;
}

void YPointBank::insert(const Vector& y) {
  if (cap_ == 0) return;
  ++revision_;
  if (bank_.size() < cap_) {
    bank_.push_back(y);
    return;
  }
  // Evict the banked point furthest from the incoming one.
  std::size_t victim = 0;
  double worst = -1.0;
  for (std::size_t i = 0; i < bank_.size(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double t = bank_[i][k] - y[k];
      d += t * t;
    }
    if (d > worst) { worst = d; victim = i; }
  }
  bank_[victim] = y;
}

} // namespace stabcert::bounds
