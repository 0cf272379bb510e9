#pragma once

#include <vector>

#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"

namespace stabcert::bounds {

// Simplex in coefficient space R^Q: m vertices (1 <= m <= Q+1) whose affine
// hull has dimension exactly m-1, the coercivity values stored at them, and
// optionally the harvested y-points.
class Simplex {
 public:
  Simplex(std::vector<Vector> vertices, Vector values,
          std::vector<Vector> y_points = {},
          const Tolerances& tol = default_tolerances());

  std::size_t size() const { return vertices_.size(); }
  std::size_t ambient_dim() const { return vertices_.front().size(); }
  const std::vector<Vector>& vertices() const { return vertices_; }
  const Vector& values() const { return values_; }
  const std::vector<Vector>& y_points() const { return y_points_; }

  Vector centroid() const;

 private:
  std::vector<Vector> vertices_;
  Vector values_;
  std::vector<Vector> y_points_;
};

struct Barycentric {
  Vector coefficients;  // sums to 1

  bool inside(double inside_tol) const;
  bool strictly_inside(double inside_tol) const;
};

// Unique affine interpolation coefficients of psi with respect to the
// simplex vertices. Throws NotInAffineHull when psi is off the hull plane
// (a real restriction for m-1 < Q).
Barycentric barycentric(const Simplex& s, const Vector& psi,
                        const Tolerances& tol = default_tolerances());

// sum_i c_i(psi) * alpha_i: a certified lower bound on alpha_Theta(psi) for
// psi inside the simplex. Throws OutsideSimplex when a coefficient is
// negative beyond tolerance.
double interp_lower_bound(const Simplex& s, const Vector& psi,
                          const Tolerances& tol = default_tolerances());

// min over the values: a certified lower bound on alpha_Theta over the whole
// convex hull of the evaluated points.
double hull_min_bound(const Vector& values);

// Affine extension of the vertex values beyond the hull: an upper bound of
// the concave alpha_Theta for points outside (or on the boundary of) the
// simplex. Throws InsideSimplex for strictly interior points.
double extrapolate_upper_bound(const Simplex& s, const Vector& psi,
                               const Tolerances& tol = default_tolerances());

// min over the bank of psi' y: every harvested y-point dominates alpha_Theta.
double ypoint_upper_bound(const Vector& psi, const std::vector<Vector>& bank);

// Capacity-capped y-point store with furthest-point eviction.
class YPointBank {
 public:
  explicit YPointBank(std::size_t cap = default_tolerances().y_bank_cap) : cap_(cap) {}

  void insert(const Vector& y);
  double upper_bound(const Vector& psi) const { return ypoint_upper_bound(psi, bank_); }
  const std::vector<Vector>& points() const { return bank_; }
  std::size_t size() const { return bank_.size(); }
  // Bumped on every insert; lets callers cache bank-dependent quantities.
  std::size_t revision() const { return revision_; }

 private:
  std::size_t cap_;
  std::vector<Vector> bank_;
  std::size_t revision_ = 0;
};

} // namespace stabcert::bounds
