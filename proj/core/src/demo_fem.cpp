#include "stabcert/demo_fem.hpp"

#include <cmath>
#include <stdexcept>

#include "stabcert/parallel.hpp"

namespace stabcert::demo {

AffineForm assemble_fem(const FemConfig& cfg) {
  const std::size_t n = cfg.n;
  if (n < 2) throw std::invalid_argument("assemble_fem: n must be >= 2");
  const double h = 1.0 / static_cast<double>(n);

  Matrix stiffness(n, n);
  Matrix convection(n, n);
  Matrix mass(n, n);

  // Two-point Gauss on each element, exact for the (quadratic) convection
  // integrand. Node 0 carries the Dirichlet condition and is eliminated;
  // global unknown j corresponds to mesh node j+1.
  const double gp[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  for (std::size_t e = 0; e < n; ++e) {
    const double x_left = static_cast<double>(e) * h;
    // Local basis on [x_left, x_left + h]: phi0 falls 1 -> 0, phi1 rises 0 -> 1.
    // Global indices of the element's nodes (mesh node e and e+1).
    const long idx[2] = {static_cast<long>(e) - 1, static_cast<long>(e)};

    const double k_local[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    const double m_local[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};

    double c_local[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (double g : gp) {
      const double s = 0.5 * (g + 1.0);  // in [0,1]
      const double x = x_left + s * h;
      const double w = 0.5 * h;  // Gauss weight mapped to the element
      const double phi[2] = {1.0 - s, s};
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          c_local[i][j] += w * (x - 0.5) * dphi[j] * phi[i];
    }

    for (int i = 0; i < 2; ++i) {
      if (idx[i] < 0) continue;
      for (int j = 0; j < 2; ++j) {
        if (idx[j] < 0) continue;
        const auto gi = static_cast<std::size_t>(idx[i]);
        const auto gj = static_cast<std::size_t>(idx[j]);
        stiffness(gi, gj) += k_local[i][j];
        convection(gi, gj) += c_local[i][j];
        mass(gi, gj) += m_local[i][j];
      }
    }
  }

  AffineForm form;
  form.n = n;
  form.terms = {stiffness, convection, mass};
  form.theta_map = theta::ThetaMap::parse({"1", "mu1", "mu2"}, 2);
  form.x_norm = stiffness;
  form.v_inner = mass;
  return form;
}

std::vector<ScenarioRow> scenario_curve(const AffineForm& form, double mu2,
                                        const Vector& mu1_grid,
                                        const std::vector<lyapunov::LyapunovCertificate>& certs,
                                        const Tolerances& tol) {
  std::vector<ScenarioRow> rows(mu1_grid.size());
  parallel_for(mu1_grid.size(), [&](std::size_t i) {
    ScenarioRow row;
    row.mu1 = mu1_grid[i];
    const Vector mu{mu1_grid[i], mu2};
    row.alpha = alpha(form, mu, tol).alpha;
    row.alpha_phi.reserve(certs.size());
    for (const auto& cert : certs) row.alpha_phi.push_back(lyapunov::phi_alpha(cert, mu, tol));
    rows[i] = std::move(row);
  });
  return rows;
}

} // namespace stabcert::demo
