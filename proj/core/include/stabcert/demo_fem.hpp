#pragma once

#include <string>
#include <vector>

#include "stabcert/affine_form.hpp"
#include "stabcert/lyapunov.hpp"
#include "stabcert/matrix.hpp"

namespace stabcert::demo {

// 1D diffusion-convection-reaction operator on (0,1):
//   -u'' + mu1 (x - 0.5) u' + mu2 u,
// homogeneous Dirichlet at x=0, homogeneous Neumann at x=1, equidistant
// piecewise-linear elements. n counts the unknowns after eliminating the
// Dirichlet node, i.e. the mesh has n elements of width 1/n.
struct FemConfig {
  std::size_t n = 180;
};

// Q = 3 terms: stiffness, convection (exactly integrated with two-point
// Gauss), mass. theta = ["1", "mu1", "mu2"], M_X = stiffness, M_V = mass.
AffineForm assemble_fem(const FemConfig& cfg = {});

struct ScenarioRow {
  double mu1 = 0.0;
  double alpha = 0.0;
  std::vector<double> alpha_phi;  // one entry per certificate
};

// Coercivity constants along a fixed-mu2 line: one row per mu1 grid value
// with alpha(mu) and alpha_phi for each certificate.
std::vector<ScenarioRow> scenario_curve(const AffineForm& form, double mu2,
                                        const Vector& mu1_grid,
                                        const std::vector<lyapunov::LyapunovCertificate>& certs,
                                        const Tolerances& tol = default_tolerances());

} // namespace stabcert::demo
