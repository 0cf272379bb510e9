#include "stabcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"
#include "stabcert/parallel.hpp"
#include "stabcert/scm.hpp"

namespace stabcert::certify {

void ParameterBox::validate() const {
  if (intervals.empty()) throw std::invalid_argument("ParameterBox: empty box");
  for (const Interval& iv : intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw std::invalid_argument("ParameterBox: bounds must be finite");
    if (iv.lo > iv.hi) throw std::invalid_argument("ParameterBox: lo > hi");
  }
}

Vector ParameterBox::center() const {
  Vector c(intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) c[i] = intervals[i].mid();
  return c;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

std::vector<std::size_t> free_dims(const std::vector<Interval>& box) {
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < box.size(); ++i)
    if (!box[i].degenerate()) dims.push_back(i);
  return dims;
}

Vector low_corner(const std::vector<Interval>& box) {
  Vector mu(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) mu[i] = box[i].lo;
  return mu;
}

// All 2^d corners, in lexicographic bit order over the free dimensions.
std::vector<Vector> box_corners(const std::vector<Interval>& box) {
  const std::vector<std::size_t> dims = free_dims(box);
  const std::size_t count = std::size_t{1} << dims.size();
  std::vector<Vector> corners;
  corners.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Vector mu = low_corner(box);
    for (std::size_t k = 0; k < dims.size(); ++k)
      if (mask & (std::size_t{1} << k)) mu[dims[k]] = box[dims[k]].hi;
    corners.push_back(std::move(mu));
  }
  return corners;
}

// Kuhn triangulation of the box restricted to its free dimensions: d!
// simplexes with d+1 corner vertices each.
std::vector<std::vector<Vector>> kuhn_simplices(const std::vector<Interval>& box) {
  const std::vector<std::size_t> dims = free_dims(box);
  if (dims.empty()) return {{low_corner(box)}};
  std::vector<std::size_t> perm = dims;
  std::sort(perm.begin(), perm.end());
  std::vector<std::vector<Vector>> out;
  do {
    std::vector<Vector> simplex;
    Vector mu = low_corner(box);
    simplex.push_back(mu);
    for (std::size_t dim : perm) {
      mu[dim] = box[dim].hi;
      simplex.push_back(mu);
    }
    out.push_back(std::move(simplex));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

struct RestrictedTheta {
  std::vector<theta::MultiPoly> polys;  // after fixing the degenerate coordinates
  bool all_affine = true;
};

RestrictedTheta restrict_thetas(const std::vector<Interval>& box, const theta::ThetaMap& map) {
  RestrictedTheta r;
  std::vector<std::optional<double>> fixed(box.size());
  for (std::size_t i = 0; i < box.size(); ++i)
    if (box[i].degenerate()) fixed[i] = box[i].lo;
  for (const theta::ThetaExpr& e : map.exprs) {
    theta::MultiPoly poly;
    try {
      poly = theta::expand(e);
    } catch (const Error&) {
      throw UnsupportedTheta("enclosure: expression '" + e.source() +
                             "' is too large to expand symbolically");
    }
    poly = theta::substitute(poly, fixed);
    if (!theta::is_affine(poly)) r.all_affine = false;
    r.polys.push_back(std::move(poly));
  }
  return r;
}

// Jacobian of a restricted affine map over the free dimensions.
Matrix affine_jacobian(const RestrictedTheta& rt, const std::vector<std::size_t>& dims) {
  Matrix j(rt.polys.size(), dims.size());
  for (std::size_t q = 0; q < rt.polys.size(); ++q) {
    for (const auto& [e, c] : rt.polys[q].terms) {
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (e[dims[k]] == 1) j(q, k) += c;
    }
  }
  return j;
}

EnclosureCell make_image_cell(const std::vector<Interval>& box, const theta::ThetaMap& map,
                              std::vector<Vector> mu_vertices, std::string construction) {
  EnclosureCell cell;
  cell.mu_box = box;
  cell.construction = std::move(construction);
  for (Vector& mu : mu_vertices) {
    cell.psi_vertices.push_back(map.eval(mu));
    cell.on_image.push_back(true);
    cell.mu_of_vertex.push_back(std::move(mu));
  }
  return cell;
}

// 2D convex hull (Andrew's monotone chain) of points given by planar
// coordinates; returns indices in counter-clockwise hull order.
std::vector<std::size_t> planar_hull(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pts[a] < pts[b];
  });
  idx.erase(std::unique(idx.begin(), idx.end(),
                        [&](std::size_t a, std::size_t b) { return pts[a] == pts[b]; }),
            idx.end());
  if (idx.size() <= 2) return idx;
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (pts[a].first - pts[o].first) * (pts[b].second - pts[o].second) -
           (pts[a].second - pts[o].second) * (pts[b].first - pts[o].first);
  };
  std::vector<std::size_t> hull(2 * idx.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], idx[i]) <= 0.0) --k;
    hull[k++] = idx[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = idx.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], idx[i]) <= 0.0) --k;
    hull[k++] = idx[i];
  }
  hull.resize(k - 1);
  return hull;
}

double best_norm(const Matrix& m) { return max_abs(m); }

std::vector<EnclosureCell> affine_image_cells(const std::vector<Interval>& box,
                                              const theta::ThetaMap& map,
                                              const RestrictedTheta& rt,
                                              const Tolerances& tol) {
  const std::vector<std::size_t> dims = free_dims(box);
  const std::size_t d = dims.size();
  if (d == 0)
    return {make_image_cell(box, map, {low_corner(box)}, "point")};
  const Matrix jac = affine_jacobian(rt, dims);
  const std::size_t rank = numerics::matrix_rank(jac, tol.simplex_rank_rel);
  if (rank == d) {
    std::vector<EnclosureCell> cells;
    for (std::vector<Vector>& simplex : kuhn_simplices(box))
      cells.push_back(make_image_cell(box, map, std::move(simplex), "affine"));
    return cells;
  }
  if (rank == 0)
    return {make_image_cell(box, map, {low_corner(box)}, "point")};

  const std::vector<Vector> corners = box_corners(box);
  std::vector<Vector> images;
  images.reserve(corners.size());
  for (const Vector& mu : corners) images.push_back(map.eval(mu));

  if (rank == 1) {
    // The image is a segment; its extremes are corner images.
    std::size_t ia = 0, ib = 0;
    double best = -1.0;
    for (std::size_t a = 0; a < images.size(); ++a) {
      for (std::size_t b = a + 1; b < images.size(); ++b) {
        Vector diff = images[a];
        axpy(-1.0, images[b], diff);
        const double dist = norm2(diff);
        if (dist > best) { best = dist; ia = a; ib = b; }
      }
    }
    return {make_image_cell(box, map, {corners[ia], corners[ib]}, "segment")};
  }
  if (rank == 2) {
    // Project onto an orthonormal basis of the image plane and fan-triangulate
    // the planar hull.
    const Vector& origin = images.front();
    Matrix diffs(origin.size(), images.size() - 1);
    for (std::size_t j = 1; j < images.size(); ++j)
      for (std::size_t i = 0; i < origin.size(); ++i)
        diffs(i, j - 1) = images[j][i] - origin[i];
    // Orthonormal pair via Gram-Schmidt on the two leading independent columns.
    Vector u, v;
    for (std::size_t j = 0; j + 1 < images.size(); ++j) {
      Vector col(origin.size());
      for (std::size_t i = 0; i < origin.size(); ++i) col[i] = diffs(i, j);
      if (u.empty()) {
        const double nn = norm2(col);
        if (nn > 1e-14) u = scaled(col, 1.0 / nn);
      } else {
        axpy(-dot(col, u), u, col);
        const double nn = norm2(col);
        if (nn > 1e-12 * (1.0 + best_norm(diffs))) {
          v = scaled(col, 1.0 / nn);
          break;
        }
      }
    }
    if (u.empty() || v.empty())
      throw UnsupportedTheta("enclosure: could not build a basis for a rank-2 affine image");
    std::vector<std::pair<double, double>> planar;
    planar.reserve(images.size());
    for (const Vector& img : images) {
      Vector rel = img;
      axpy(-1.0, origin, rel);
      planar.emplace_back(dot(rel, u), dot(rel, v));
    }
    const std::vector<std::size_t> hull = planar_hull(planar);
    if (hull.size() < 3)
      throw UnsupportedTheta("enclosure: degenerate rank-2 affine image");
    std::vector<EnclosureCell> cells;
    for (std::size_t i = 1; i + 1 < hull.size(); ++i)
      cells.push_back(make_image_cell(box, map,
                                      {corners[hull[0]], corners[hull[i]], corners[hull[i + 1]]},
                                      "hull-fan"));
    return cells;
  }
  throw UnsupportedTheta("enclosure: affine image of rank " + std::to_string(rank) +
                         " inside a " + std::to_string(d) + "-dimensional cell is not supported");
}

std::vector<EnclosureCell> curve_cells(const std::vector<Interval>& box,
                                       const theta::ThetaMap& map,
                                       const RestrictedTheta& rt,
                                       const Tolerances& tol) {
  const std::vector<std::size_t> dims = free_dims(box);
  if (dims.size() != 1)
    throw UnsupportedTheta("enclosure: non-affine theta over a " +
                           std::to_string(dims.size()) + "-dimensional cell is not supported");
  const std::size_t tdim = dims.front();
  const double t0 = box[tdim].lo;
  const double t1 = box[tdim].hi;

  std::size_t curved_q = map.q();
  std::vector<double> curved_coeffs;
  for (std::size_t q = 0; q < rt.polys.size(); ++q) {
    if (theta::is_affine(rt.polys[q])) continue;
    if (curved_q != map.q())
      throw UnsupportedTheta("enclosure: more than one non-affine coordinate on a cell "
                             "is not supported");
    curved_q = q;
    curved_coeffs = theta::univariate_coefficients(rt.polys[q], static_cast<int>(tdim) + 1);
  }
  // All affine after restriction: not a curve cell.
  if (curved_q == map.q()) return affine_image_cells(box, map, rt, tol);

  const theta::Shape1D shape = theta::classify_univariate(curved_coeffs, t0, t1);
  if (shape != theta::Shape1D::Convex && shape != theta::Shape1D::Concave)
    throw UnsupportedTheta("enclosure: coordinate " + std::to_string(curved_q + 1) +
                           " is neither convex nor concave on the cell "
                           "(supply a finer domain split or a different map)");
  const double sign = (shape == theta::Shape1D::Convex) ? 1.0 : -1.0;

  const std::vector<double> deriv = theta::poly_derivative(curved_coeffs);
  const double g0 = theta::poly_eval(curved_coeffs, t0);
  const double g1 = theta::poly_eval(curved_coeffs, t1);
  const double d0 = theta::poly_eval(deriv, t0);
  const double d1 = theta::poly_eval(deriv, t1);

  // Tangent intersection parameter; for convex g, d0 <= d1.
  double tstar = 0.5 * (t0 + t1);
  if (std::abs(d1 - d0) > 1e-14 * (std::abs(d0) + std::abs(d1) + 1.0))
    tstar = (g0 - g1 + d1 * t1 - d0 * t0) / (d1 - d0);
  tstar = std::clamp(tstar, t0, t1);
  double apex = g0 + d0 * (tstar - t0);  // value on the tangent at t0

  const double scale = std::max({1.0, std::abs(g0), std::abs(g1), std::abs(apex)});
  const double pad = 1e-8 * scale;
  // Push the apex outward past the secant so the triangle strictly contains
  // the curve and stays numerically non-degenerate.
  const double secant_at_tstar = g0 + (g1 - g0) * ((tstar - t0) / (t1 - t0));
  if (sign > 0.0) {
    apex = std::min(apex - pad, secant_at_tstar - pad);
  } else {
    apex = std::max(apex + pad, secant_at_tstar + pad);
  }

  Vector mu0 = low_corner(box);
  mu0[tdim] = t0;
  Vector mu1 = low_corner(box);
  mu1[tdim] = t1;

  Vector psi0 = map.eval(mu0);
  Vector psi1 = map.eval(mu1);

  EnclosureCell cell;
  cell.mu_box = box;
  cell.construction = "curve-triangle";
  cell.psi_vertices = {psi0, psi1};
  cell.on_image = {true, true};
  cell.mu_of_vertex = {mu0, mu1};

  // Apex: affine coordinates follow the affine restriction at tstar, the
  // curved coordinate sits on the padded tangent intersection.
  Vector mustar = low_corner(box);
  mustar[tdim] = tstar;
  Vector apex_psi = map.eval(mustar);
  apex_psi[curved_q] = apex;

  // Degenerate affine part: the triangle collapses to a segment in the
  // curved coordinate. Cover with the padded value interval instead.
  bool affine_varies = false;
  for (std::size_t q = 0; q < map.q(); ++q) {
    if (q == curved_q) continue;
    if (psi0[q] != psi1[q]) affine_varies = true;
  }
  if (!affine_varies) {
    const bool far_is_first = (sign > 0) == (g0 >= g1);
    Vector far = far_is_first ? psi0 : psi1;
    Vector near = psi0;
    near[curved_q] = apex;
    cell.psi_vertices = {near, far};
    cell.on_image = {false, true};
    cell.mu_of_vertex = {Vector{}, far_is_first ? mu0 : mu1};
    return {cell};
  }

  cell.psi_vertices.push_back(std::move(apex_psi));
  cell.on_image.push_back(false);
  cell.mu_of_vertex.push_back(Vector{});
  return {cell};
}

} // namespace

std::vector<EnclosureCell> enclose_box_image(const std::vector<Interval>& mu_box,
                                             const theta::ThetaMap& map,
                                             const Tolerances& tol) {
  const RestrictedTheta rt = restrict_thetas(mu_box, map);
  if (rt.all_affine) return affine_image_cells(mu_box, map, rt, tol);
  return curve_cells(mu_box, map, rt, tol);
}

namespace {

std::vector<std::vector<Interval>> subdivide(const std::vector<Interval>& box,
                                             std::size_t resolution) {
  if (resolution <= 1) return {box};
  const std::vector<std::size_t> dims = free_dims(box);
  std::vector<std::vector<Interval>> out{box};
  for (std::size_t dim : dims) {
    std::vector<std::vector<Interval>> next;
    for (const std::vector<Interval>& b : out) {
      const double lo = b[dim].lo;
      const double w = b[dim].hi - b[dim].lo;
      for (std::size_t k = 0; k < resolution; ++k) {
        std::vector<Interval> sub = b;
        sub[dim].lo = lo + w * (static_cast<double>(k) / static_cast<double>(resolution));
        sub[dim].hi = lo + w * (static_cast<double>(k + 1) / static_cast<double>(resolution));
        next.push_back(std::move(sub));
      }
    }
    out = std::move(next);
  }
  return out;
}

bool theta_is_globally_affine(const theta::ThetaMap& map) {
  for (const theta::ThetaExpr& e : map.exprs) {
    theta::MultiPoly poly;
    try {
      poly = theta::expand(e);
    } catch (const Error&) {
      throw UnsupportedTheta("enclosure: expression '" + e.source() +
                             "' is too large to expand symbolically");
    }
    if (!theta::is_affine(poly)) return false;
  }
  return true;
}

} // namespace

std::vector<EnclosureCell> enclose_boundary(const ParameterBox& domain,
                                            const theta::ThetaMap& map,
                                            std::size_t resolution,
                                            const Tolerances& tol) {
  domain.validate();
  if (static_cast<int>(domain.p()) != map.p)
    throw std::invalid_argument("enclose_boundary: domain dimension does not match theta");
  if (resolution == 0) resolution = 1;

  // For affine maps the image boundary is covered by the facet images; for
  // curved maps the cells cover all of Theta(D), a superset of Gamma.
  std::vector<std::vector<Interval>> pieces;
  const std::vector<std::size_t> dims = free_dims(domain.intervals);
  if (theta_is_globally_affine(map) && !dims.empty()) {
    for (std::size_t dim : dims) {
      std::vector<Interval> lo_facet = domain.intervals;
      lo_facet[dim].hi = lo_facet[dim].lo;
      std::vector<Interval> hi_facet = domain.intervals;
      hi_facet[dim].lo = hi_facet[dim].hi;
      pieces.push_back(std::move(lo_facet));
      pieces.push_back(std::move(hi_facet));
    }
  } else {
    pieces.push_back(domain.intervals);
  }

  std::vector<EnclosureCell> cells;
  for (const std::vector<Interval>& piece : pieces) {
    for (const std::vector<Interval>& sub : subdivide(piece, resolution)) {
      for (EnclosureCell& cell : enclose_box_image(sub, map, tol))
        cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Boundary stability certification
// ---------------------------------------------------------------------------

namespace {

struct VertexPool {
  std::map<Vector, std::size_t> index_of;
  std::vector<EvaluatedPoint> points;

  // Returns the ids of vertices not yet evaluated.
  std::vector<std::size_t> intern(const EnclosureCell& cell, std::vector<std::size_t>& ids) {
    std::vector<std::size_t> fresh;
    ids.clear();
    for (std::size_t k = 0; k < cell.psi_vertices.size(); ++k) {
      const Vector& psi = cell.psi_vertices[k];
      auto [it, inserted] = index_of.try_emplace(psi, points.size());
      if (inserted) {
        EvaluatedPoint pt;
        pt.psi = psi;
        pt.on_image = cell.on_image[k];
        if (cell.on_image[k]) pt.mu = cell.mu_of_vertex[k];
        pt.alpha = std::numeric_limits<double>::quiet_NaN();
        points.push_back(std::move(pt));
        fresh.push_back(it->second);
      } else if (cell.on_image[k] && !points[it->second].on_image) {
        points[it->second].on_image = true;
        points[it->second].mu = cell.mu_of_vertex[k];
      }
      ids.push_back(it->second);
    }
    return fresh;
  }
};

struct WorkCell {
  std::vector<Interval> mu_box;
  std::vector<std::size_t> vertex_ids;
  std::string construction;
};

double cell_bound(const WorkCell& cell, const std::vector<EvaluatedPoint>& points) {
  double b = std::numeric_limits<double>::infinity();
  for (std::size_t id : cell.vertex_ids) b = std::min(b, points[id].alpha);
  return b;
}

void evaluate_batch(const AffineForm& form, std::vector<EvaluatedPoint>& points,
                    const std::vector<std::size_t>& ids, const Tolerances& tol) {
  parallel_for(ids.size(), [&](std::size_t k) {
    EvaluatedPoint& pt = points[ids[k]];
    const CoercivityResult r = alpha_theta(form, pt.psi, tol);
    pt.alpha = r.alpha;
    pt.y_point = r.y_point;
  });
}

} // namespace

StabilityCertificate certify_stability(const AffineForm& form, const ParameterBox& domain,
                                       double margin, std::size_t max_iter,
                                       std::size_t resolution, const Tolerances& tol) {
  StabilityCertificate cert;
  cert.margin = margin;
  cert.budget = max_iter;
  cert.resolution = resolution;

  std::vector<EnclosureCell> initial = enclose_boundary(domain, form.theta_map, resolution, tol);

  VertexPool pool;
  std::vector<WorkCell> cells;
  std::vector<std::size_t> all_fresh;
  for (const EnclosureCell& cell : initial) {
    WorkCell wc;
    wc.mu_box = cell.mu_box;
    wc.construction = cell.construction;
    std::vector<std::size_t> fresh = pool.intern(cell, wc.vertex_ids);
    all_fresh.insert(all_fresh.end(), fresh.begin(), fresh.end());
    cells.push_back(std::move(wc));
  }
  evaluate_batch(form, pool.points, all_fresh, tol);

  auto finish = [&](Verdict verdict) {
    cert.verdict = verdict;
    cert.evaluated = pool.points;
    for (const WorkCell& wc : cells) {
      CellRecord rec;
      rec.mu_box = wc.mu_box;
      rec.vertex_ids = wc.vertex_ids;
      rec.bound = cell_bound(wc, pool.points);
      rec.construction = wc.construction;
      cert.cells.push_back(std::move(rec));
    }
    return cert;
  };

  auto unstable_witness = [&](std::size_t id) {
    cert.witness_psi = pool.points[id].psi;
    cert.witness_alpha = pool.points[id].alpha;
    cert.witness_mu = pool.points[id].mu;
    return finish(Verdict::Unstable);
  };

  // A non-positive value at an evaluated image point disproves stability.
  for (std::size_t id = 0; id < pool.points.size(); ++id)
    if (pool.points[id].on_image && pool.points[id].alpha <= 0.0)
      return unstable_witness(id);

  for (;;) {
    // Convex-hull short-circuit / per-cell certified bounds.
    double weakest = std::numeric_limits<double>::infinity();
    std::size_t weakest_cell = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double b = cell_bound(cells[i], pool.points);
      if (b < weakest) { weakest = b; weakest_cell = i; }
    }
    if (weakest > margin) return finish(Verdict::Stable);

    if (cert.adaptive_evaluations >= max_iter) return finish(Verdict::Inconclusive);

    WorkCell& target = cells[weakest_cell];
    const std::vector<std::size_t> target_dims = free_dims(target.mu_box);
    if (target_dims.empty()) return finish(Verdict::Inconclusive);

    // Evaluate the weakest boundary point: the image of the cell's center.
    Vector mu_mid(target.mu_box.size());
    for (std::size_t i = 0; i < target.mu_box.size(); ++i) mu_mid[i] = target.mu_box[i].mid();
    const Vector psi_mid = form.theta_map.eval(mu_mid);
    std::size_t mid_id;
    if (auto it = pool.index_of.find(psi_mid); it != pool.index_of.end()) {
      mid_id = it->second;
      if (!pool.points[mid_id].on_image) {
        pool.points[mid_id].on_image = true;
        pool.points[mid_id].mu = mu_mid;
      }
    } else {
      mid_id = pool.points.size();
      pool.index_of.emplace(psi_mid, mid_id);
      EvaluatedPoint pt;
      pt.psi = psi_mid;
      pt.on_image = true;
      pt.mu = mu_mid;
      const CoercivityResult r = alpha_theta(form, psi_mid, tol);
      pt.alpha = r.alpha;
      pt.y_point = r.y_point;
      pool.points.push_back(std::move(pt));
      ++cert.adaptive_evaluations;
    }
    if (pool.points[mid_id].alpha <= 0.0) return unstable_witness(mid_id);

    // Split the weakest cell along its longest free dimension and re-enclose.
    std::size_t split_dim = target_dims.front();
    for (std::size_t dim : target_dims)
      if (target.mu_box[dim].width() > target.mu_box[split_dim].width()) split_dim = dim;
    const double split_at = target.mu_box[split_dim].mid();
    if (split_at <= target.mu_box[split_dim].lo || split_at >= target.mu_box[split_dim].hi)
      return finish(Verdict::Inconclusive);  // interval exhausted numerically
    std::vector<Interval> left = target.mu_box;
    std::vector<Interval> right = target.mu_box;
    left[split_dim].hi = split_at;
    right[split_dim].lo = split_at;

    std::vector<WorkCell> replacements;
    std::vector<std::size_t> fresh;
    for (const std::vector<Interval>& half : {left, right}) {
      for (const EnclosureCell& cell : enclose_box_image(half, form.theta_map, tol)) {
        WorkCell wc;
        wc.mu_box = cell.mu_box;
        wc.construction = cell.construction;
        std::vector<std::size_t> f = pool.intern(cell, wc.vertex_ids);
        fresh.insert(fresh.end(), f.begin(), f.end());
        replacements.push_back(std::move(wc));
      }
    }
    if (cert.adaptive_evaluations + fresh.size() > max_iter) {
      // Cannot afford the refinement; report what is proven so far.
      for (std::size_t id : fresh) {
        pool.index_of.erase(pool.points[id].psi);
      }
      // Drop the unevaluated placeholders (they are the trailing entries).
      while (!pool.points.empty() && std::isnan(pool.points.back().alpha))
        pool.points.pop_back();
      return finish(Verdict::Inconclusive);
    }
    evaluate_batch(form, pool.points, fresh, tol);
    cert.adaptive_evaluations += fresh.size();
    for (std::size_t id : fresh)
      if (pool.points[id].on_image && pool.points[id].alpha <= 0.0)
        return unstable_witness(id);

    cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(weakest_cell));
    cells.insert(cells.end(), replacements.begin(), replacements.end());
  }
}

// ---------------------------------------------------------------------------
// Adaptive bound mesh
// ---------------------------------------------------------------------------

namespace {

struct MeshBuilder {
  const AffineForm& form;
  const Tolerances& tol;
  BoundMesh mesh;
  bounds::YPointBank bank;
  std::map<Vector, std::size_t> vertex_index;
  std::optional<scm::ScmState> scm_state;

  MeshBuilder(const AffineForm& f, const Tolerances& t, std::size_t bank_cap)
      : form(f), tol(t), bank(bank_cap) {}

  std::size_t add_vertex(const Vector& psi, bool scm_valued) {
    auto [it, inserted] = vertex_index.try_emplace(psi, mesh.vertices.size());
    if (!inserted) return it->second;
    MeshVertex v;
    v.psi = psi;
    if (scm_valued) {
      v.value = scm::scm_lower_bound(*scm_state, psi, tol);
      v.exact = false;
    } else {
      const CoercivityResult r = alpha_theta(form, psi, tol);
      v.value = r.alpha;
      v.exact = true;
      bank.insert(r.y_point);
      if (scm_state) scm_state->constraints.push_back({psi, r.alpha});
    }
    ++mesh.evaluations;
    mesh.vertices.push_back(std::move(v));
    return mesh.vertices.size() - 1;
  }

  double simplex_gap(const MeshSimplex& s) const {
    if (s.v.size() == 1)
      return mesh.vertices[s.v[0]].exact ? 0.0 : bank_gap_at(mesh.vertices[s.v[0]].psi,
                                                             mesh.vertices[s.v[0]].value);
    Vector centroid(mesh.vertices[s.v[0]].psi.size(), 0.0);
    double lb = 0.0;
    for (std::size_t id : s.v) {
      axpy(1.0, mesh.vertices[id].psi, centroid);
      lb += mesh.vertices[id].value;
    }
    const double inv = 1.0 / static_cast<double>(s.v.size());
    for (double& x : centroid) x *= inv;
    lb *= inv;
    return bank_gap_at(centroid, lb);
  }

  double bank_gap_at(const Vector& psi, double lb) const {
    if (bank.size() == 0) return std::numeric_limits<double>::infinity();
    return bank.upper_bound(psi) - lb;
  }

  void refresh_gaps() {
    for (MeshSimplex& s : mesh.simplices) s.gap = simplex_gap(s);
  }
};

} // namespace

BoundMesh build_bound_mesh(const AffineForm& form, const ParameterBox& domain,
                           const MeshBuildOptions& options, const Tolerances& tol) {
  domain.validate();
  if (options.scm_vertices && !options.use_scm)
    throw std::invalid_argument("build_bound_mesh: scm_vertices requires use_scm");

  MeshBuilder b(form, tol, tol.y_bank_cap);
  b.mesh.gap_tol = options.gap_tol;
  b.mesh.theta_sources = form.theta_map.sources();
  b.mesh.theta_p = form.theta_map.p;
  b.mesh.domain = domain.intervals;
  b.mesh.used_scm = options.use_scm;
  b.mesh.scm_vertices = options.scm_vertices;

  // Initial simplicial cover of an enclosing polytope of Theta(D): exact
  // image triangulation for affine (or supported curve) maps, otherwise the
  // per-coordinate interval box.
  std::vector<std::vector<Vector>> cover;
  try {
    for (const EnclosureCell& cell : enclose_box_image(domain.intervals, form.theta_map, tol))
      cover.push_back(cell.psi_vertices);
  } catch (const UnsupportedTheta&) {
    std::vector<Interval> psi_box;
    std::vector<std::optional<double>> none(domain.p());
    std::vector<std::pair<double, double>> box_pairs;
    for (const Interval& iv : domain.intervals) box_pairs.emplace_back(iv.lo, iv.hi);
    for (const theta::ThetaExpr& e : form.theta_map.exprs) {
      const auto [lo, hi] = theta::interval_range(theta::expand(e), box_pairs);
      psi_box.push_back({lo, hi});
    }
    for (const std::vector<Vector>& s : kuhn_simplices(psi_box)) cover.push_back(s);
  }

  if (options.use_scm) {
    b.scm_state = scm::build_box(form, tol);
    // Seed the offline state on the cover vertices (deduplicated).
    std::set<Vector> seeds;
    for (const std::vector<Vector>& s : cover) seeds.insert(s.begin(), s.end());
    std::vector<Vector> train(seeds.begin(), seeds.end());
    scm::greedy_enrich(*b.scm_state, form, train, options.gap_tol * 0.5,
                       options.scm_budget, tol);
    for (const Vector& y : b.scm_state->y_bank) b.bank.insert(y);
    b.mesh.evaluations += b.scm_state->constraints.size();
  }

  for (const std::vector<Vector>& s : cover) {
    MeshSimplex ms;
    for (const Vector& psi : s) ms.v.push_back(b.add_vertex(psi, options.scm_vertices));
    b.mesh.simplices.push_back(std::move(ms));
  }
  b.refresh_gaps();
  std::size_t gap_revision = b.bank.revision();

  const std::size_t iteration_cap = 32 * options.budget + 256;
  for (std::size_t iteration = 0;; ++iteration) {
    if (b.bank.revision() != gap_revision) {
      b.refresh_gaps();
      gap_revision = b.bank.revision();
    }
    // Largest refinable gap above tolerance, lowest index wins.
    std::size_t target = b.mesh.simplices.size();
    double worst = options.gap_tol;
    for (std::size_t i = 0; i < b.mesh.simplices.size(); ++i) {
      const MeshSimplex& s = b.mesh.simplices[i];
      if (s.v.size() < 2 || !s.splittable) continue;
      if (s.gap > worst) { worst = s.gap; target = i; }
    }
    if (target == b.mesh.simplices.size()) {
      b.mesh.tol_met = true;
      for (const MeshSimplex& s : b.mesh.simplices)
        if (s.gap > options.gap_tol) b.mesh.tol_met = false;
      break;
    }
    if (b.mesh.evaluations >= options.budget || iteration >= iteration_cap) {
      b.mesh.tol_met = false;
      break;
    }

    // Longest edge of the worst simplex; lexicographic vertex-id tie-break.
    MeshSimplex& s = b.mesh.simplices[target];
    std::size_t ea = s.v[0], eb = s.v[1];
    double longest = -1.0;
    double vertex_scale = 1.0;
    for (std::size_t i = 0; i < s.v.size(); ++i) {
      vertex_scale = std::max(vertex_scale, norm2(b.mesh.vertices[s.v[i]].psi));
      for (std::size_t j = i + 1; j < s.v.size(); ++j) {
        Vector diff = b.mesh.vertices[s.v[i]].psi;
        axpy(-1.0, b.mesh.vertices[s.v[j]].psi, diff);
        const double len = norm2(diff);
        const std::size_t lo = std::min(s.v[i], s.v[j]);
        const std::size_t hi = std::max(s.v[i], s.v[j]);
        if (len > longest + 1e-15 ||
            (std::abs(len - longest) <= 1e-15 &&
             std::make_pair(lo, hi) < std::make_pair(std::min(ea, eb), std::max(ea, eb)))) {
          longest = len;
          ea = lo;
          eb = hi;
        }
      }
    }
    if (longest <= 1e-12 * vertex_scale) {
      // Numerically a point; bisection cannot make progress here.
      s.splittable = false;
      continue;
    }
    Vector mid = b.mesh.vertices[ea].psi;
    axpy(1.0, b.mesh.vertices[eb].psi, mid);
    for (double& x : mid) x *= 0.5;
    const std::size_t mid_id = b.add_vertex(mid, options.scm_vertices);
    if (mid_id == ea || mid_id == eb) {
      s.splittable = false;
      continue;
    }

    // Split every simplex sharing the edge (keeps the mesh conforming);
    // children whose vertex set degenerates are dropped.
    std::vector<MeshSimplex> next;
    std::vector<std::size_t> fresh;
    next.reserve(b.mesh.simplices.size() + 4);
    for (const MeshSimplex& cur : b.mesh.simplices) {
      const bool has_a = std::find(cur.v.begin(), cur.v.end(), ea) != cur.v.end();
      const bool has_b = std::find(cur.v.begin(), cur.v.end(), eb) != cur.v.end();
      if (!(has_a && has_b)) {
        next.push_back(cur);
        continue;
      }
      for (const std::size_t drop : {eb, ea}) {
        MeshSimplex child = cur;
        child.splittable = true;
        std::replace(child.v.begin(), child.v.end(), drop, mid_id);
        std::set<std::size_t> unique_ids(child.v.begin(), child.v.end());
        if (unique_ids.size() != child.v.size()) continue;
        fresh.push_back(next.size());
        next.push_back(std::move(child));
      }
    }
    b.mesh.simplices = std::move(next);
    if (b.bank.revision() != gap_revision) {
      b.refresh_gaps();
      gap_revision = b.bank.revision();
    } else {
      for (std::size_t idx : fresh)
        b.mesh.simplices[idx].gap = b.simplex_gap(b.mesh.simplices[idx]);
    }
  }

  b.mesh.y_bank = b.bank.points();
  return b.mesh;
}

double query_lower_bound_psi(const BoundMesh& mesh, const Vector& psi, const Tolerances& tol) {
  for (const MeshSimplex& s : mesh.simplices) {
    std::vector<Vector> verts;
    Vector values;
    for (std::size_t id : s.v) {
      verts.push_back(mesh.vertices[id].psi);
      values.push_back(mesh.vertices[id].value);
    }
    try {
      const bounds::Simplex simplex(std::move(verts), std::move(values), {}, tol);
      return bounds::interp_lower_bound(simplex, psi, tol);
    } catch (const NotInAffineHull&) {
    } catch (const OutsideSimplex&) {
    } catch (const DegenerateSimplex&) {
    }
  }
  throw OutsideCover("query: Theta(mu) is not covered by the mesh");
}

double query_lower_bound(const BoundMesh& mesh, const Vector& mu, const Tolerances& tol) {
  const theta::ThetaMap map = theta::ThetaMap::parse(mesh.theta_sources, mesh.theta_p);
  return query_lower_bound_psi(mesh, map.eval(mu), tol);
}

} // namespace stabcert::certify
