#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stabcert/affine_form.hpp"
#include "stabcert/bounds.hpp"
#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"
#include "stabcert/theta.hpp"

namespace stabcert::certify {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate() const { return lo == hi; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Bounded parameter domain D as a box in R^p (degenerate coordinates allowed).
struct ParameterBox {
  std::vector<Interval> intervals;

  std::size_t p() const { return intervals.size(); }
  void validate() const;  // finite, lo <= hi, nonempty
  Vector center() const;
};

// A sub-box of D (or of one of its facets) together with a simplex in R^Q
// certified to contain the Theta-image of the sub-box. Vertices that are
// exact Theta-images carry their preimage.
struct EnclosureCell {
  std::vector<Interval> mu_box;          // fixed coordinates are degenerate
  std::vector<Vector> psi_vertices;
  std::vector<bool> on_image;            // vertex equals Theta(mu) for a known mu
  std::vector<Vector> mu_of_vertex;      // empty vector when off the image
  std::string construction;              // "point" | "affine" | "segment" | "hull-fan" | "curve-triangle"
};

// Non-overlapping simplex enclosures covering Gamma, the (relative) boundary
// of Theta(D). Fully affine maps use exact facet triangulations; a single
// free parameter with exactly one convex/concave coordinate uses the
// secant/tangent triangle; everything else throws UnsupportedTheta.
// For non-affine maps the cells cover all of Theta(D), a superset of Gamma.
std::vector<EnclosureCell> enclose_boundary(const ParameterBox& domain,
                                            const theta::ThetaMap& map,
                                            std::size_t resolution = 1,
                                            const Tolerances& tol = default_tolerances());

// Enclosure of the image of one sub-box (the piece enclose_boundary and the
// refinement loop both build from).
std::vector<EnclosureCell> enclose_box_image(const std::vector<Interval>& mu_box,
                                             const theta::ThetaMap& map,
                                             const Tolerances& tol = default_tolerances());

enum class Verdict { Stable, Unstable, Inconclusive };

const char* to_string(Verdict v);

struct EvaluatedPoint {
  Vector psi;
  double alpha = 0.0;
  Vector y_point;
  bool on_image = false;
  std::optional<Vector> mu;
};

struct CellRecord {
  std::vector<Interval> mu_box;
  std::vector<std::size_t> vertex_ids;  // into StabilityCertificate::evaluated
  double bound = 0.0;                   // min vertex value: certified on the cell
  std::string construction;
};

struct StabilityCertificate {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<Vector> witness_psi;
  std::optional<double> witness_alpha;
  std::optional<Vector> witness_mu;
  std::vector<EvaluatedPoint> evaluated;
  std::vector<CellRecord> cells;
  double margin = 0.0;
  std::size_t budget = 0;
  std::size_t adaptive_evaluations = 0;
  std::size_t resolution = 1;
};

// Boundary stability certification: evaluate the enclosure vertices, try the
// convex-hull short-circuit, then adaptively evaluate the weakest boundary
// point and split its cell until stability is proven (every cell bound >
// margin), a witness with alpha <= 0 is found on the image, or the adaptive
// budget is exhausted (-> Inconclusive, never a false verdict).
StabilityCertificate certify_stability(const AffineForm& form, const ParameterBox& domain,
                                       double margin, std::size_t max_iter,
                                       std::size_t resolution = 1,
                                       const Tolerances& tol = default_tolerances());

struct MeshVertex {
  Vector psi;
  double value = 0.0;  // certified lower bound at psi (exact alpha or SCM LP bound)
  bool exact = true;
};

struct MeshSimplex {
  std::vector<std::size_t> v;
  double gap = 0.0;  // at the centroid: y-bank upper bound minus interpolated lower bound
  bool splittable = true;  // cleared once the longest edge degenerates numerically
};

struct BoundMesh {
  std::vector<MeshVertex> vertices;
  std::vector<MeshSimplex> simplices;
  std::vector<Vector> y_bank;
  double gap_tol = 0.0;
  bool tol_met = false;
  std::size_t evaluations = 0;
  std::vector<std::string> theta_sources;
  int theta_p = 0;
  std::vector<Interval> domain;
  bool used_scm = false;
  bool scm_vertices = false;
};

struct MeshBuildOptions {
  double gap_tol = 0.05;
  bool use_scm = false;
  bool scm_vertices = false;   // requires use_scm
  std::size_t budget = 4000;   // max vertex evaluations (exact or LP)
  std::size_t scm_budget = 24; // exact evaluations spent on SCM enrichment
};

// Adaptive simplex mesh covering an enclosing polytope of Theta(D), vertex
// values are certified lower bounds, refinement by conforming longest-edge
// bisection where the centroid gap exceeds gap_tol. Budget exhaustion leaves
// tol_met false; the partial mesh is still a valid certificate.
BoundMesh build_bound_mesh(const AffineForm& form, const ParameterBox& domain,
                           const MeshBuildOptions& options,
                           const Tolerances& tol = default_tolerances());

// Locate the simplex containing Theta(mu) (lowest index wins) and return the
// interpolated lower bound. Throws OutsideCover.
double query_lower_bound(const BoundMesh& mesh, const Vector& mu,
                         const Tolerances& tol = default_tolerances());
double query_lower_bound_psi(const BoundMesh& mesh, const Vector& psi,
                             const Tolerances& tol = default_tolerances());

} // namespace stabcert::certify
