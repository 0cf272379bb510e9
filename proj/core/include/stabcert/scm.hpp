#pragma once

#include <cstddef>
#include <vector>

#include "stabcert/affine_form.hpp"
#include "stabcert/bounds.hpp"
#include "stabcert/config.hpp"
#include "stabcert/matrix.hpp"

namespace stabcert::scm {

// Successive-constraints state: per-coordinate extreme eigenvalues of the
// pencils (sym(A_q), M_X), exact-value constraints, and the y-point bank for
// upper bounds.
struct ScmState {
  Vector box_lower;  // sigma_q^-
  Vector box_upper;  // sigma_q^+
  struct Constraint {
    Vector eta;
    double alpha = 0.0;
  };
  std::vector<Constraint> constraints;
  std::vector<Vector> y_bank;
};

// Extreme eigenvalues of every term pencil; every realizable y-point lies in
// the resulting box.
ScmState build_box(const AffineForm& form, const Tolerances& tol = default_tolerances());

// Evaluate alpha_Theta(eta) and record (eta, alpha) plus the harvested y.
void add_sample(ScmState& state, const AffineForm& form, const Vector& eta,
                const Tolerances& tol = default_tolerances());

// LP lower bound: min psi' y over the box intersected with eta' y >= alpha
// for all recorded constraints. Never exceeds alpha_Theta(psi).
double scm_lower_bound(const ScmState& state, const Vector& psi,
                       const Tolerances& tol = default_tolerances());

// min over the bank of psi' y. Never below alpha_Theta(psi). Throws on an
// empty bank.
double scm_upper_bound(const ScmState& state, const Vector& psi);

struct EnrichReport {
  std::vector<double> max_gap_history;  // max train gap before each evaluation
  std::vector<std::size_t> evaluated;   // train indices, in evaluation order
  double final_max_gap = 0.0;
  bool converged = false;
};

// Greedy offline loop: repeatedly evaluate the train point with the largest
// UB - LB gap (lowest index wins ties) until the gap is at or below tol or
// max_evals evaluations have been spent.
EnrichReport greedy_enrich(ScmState& state, const AffineForm& form,
                           const std::vector<Vector>& train, double gap_tol,
                           std::size_t max_evals,
                           const Tolerances& tol = default_tolerances());

} // namespace stabcert::scm
