#include "stabcert/scm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stabcert/errors.hpp"
#include "stabcert/numerics.hpp"

namespace stabcert::scm {

ScmState build_box(const AffineForm& form, const Tolerances& tol) {
  ScmState state;
  state.box_lower.resize(form.q());
  state.box_upper.resize(form.q());
  for (std::size_t q = 0; q < form.q(); ++q) {
    const Matrix s = symmetric_part(form.terms[q]);
    const numerics::PencilEig eig = numerics::sym_eig_pencil(s, form.x_norm, tol);
    state.box_lower[q] = eig.values.front();
    state.box_upper[q] = eig.values.back();
  }
  return state;
}

void add_sample(ScmState& state, const AffineForm& form, const Vector& eta,
                const Tolerances& tol) {
  const CoercivityResult r = alpha_theta(form, eta, tol);
  state.constraints.push_back({eta, r.alpha});
  state.y_bank.push_back(r.y_point);
}

double scm_lower_bound(const ScmState& state, const Vector& psi, const Tolerances& tol) {
  if (psi.size() != state.box_lower.size())
    throw std::invalid_argument("scm_lower_bound: psi dimension mismatch");
  std::vector<numerics::LinearConstraint> lp_constraints;
  lp_constraints.reserve(state.constraints.size());
  for (const auto& c : state.constraints) lp_constraints.push_back({c.eta, c.alpha});
  try {
    return numerics::solve_lp(psi, state.box_lower, state.box_upper, lp_constraints, tol).value;
  } catch (const Infeasible&) {
    throw Infeasible("scm_lower_bound: constraint set inconsistent with the box "
                     "(corrupted state)");
  }
}

double scm_upper_bound(const ScmState& state, const Vector& psi) {
  return bounds::ypoint_upper_bound(psi, state.y_bank);
}

EnrichReport greedy_enrich(ScmState& state, const AffineForm& form,
                           const std::vector<Vector>& train, double gap_tol,
                           std::size_t max_evals, const Tolerances& tol) {
  if (train.empty()) throw EmptyInput("greedy_enrich: empty train set");
  EnrichReport report;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t round = 0;; ++round) {
    double max_gap = -inf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double lb = scm_lower_bound(state, train[i], tol);
      const double ub = state.y_bank.empty() ? inf : scm_upper_bound(state, train[i]);
      const double gap = ub - lb;
      if (gap > max_gap) { max_gap = gap; arg = i; }
    }
    report.final_max_gap = max_gap;
    if (max_gap <= gap_tol) {
      report.converged = true;
      return report;
    }
    if (report.evaluated.size() >= max_evals) return report;
    report.max_gap_history.push_back(max_gap);
    report.evaluated.push_back(arg);
    add_sample(state, form, train[arg], tol);
  }
}

} // namespace stabcert::scm
