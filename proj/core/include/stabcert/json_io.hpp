#pragma once

#include <string>
#include <vector>

#include "stabcert/affine_form.hpp"
#include "stabcert/certify.hpp"
#include "stabcert/demo_fem.hpp"
#include "stabcert/lyapunov.hpp"

namespace stabcert::io {

// Operator file: {"format_version", "n", "p", "theta": [strings],
// "terms": [matrix...], "x_norm": matrix, "v_inner"?: matrix}. A matrix is
// either a dense list of row lists or {"rows", "cols", "coo": [[i,j,v],...]}.
AffineForm load_operator(const std::string& path);
AffineForm parse_operator(const std::string& text);
std::string serialize_operator(const AffineForm& form);
void save_operator(const AffineForm& form, const std::string& path);

// FNV-1a over the canonical operator serialization; ties certificates to the
// operator they were computed from.
std::string operator_hash(const AffineForm& form);

std::string serialize_certificate(const certify::StabilityCertificate& cert,
                                  const std::string& op_hash);
certify::StabilityCertificate parse_certificate(const std::string& text);
void save_certificate(const certify::StabilityCertificate& cert, const std::string& op_hash,
                      const std::string& path);
certify::StabilityCertificate load_certificate(const std::string& path);

std::string serialize_mesh(const certify::BoundMesh& mesh, const std::string& op_hash);
certify::BoundMesh parse_mesh(const std::string& text);
void save_mesh(const certify::BoundMesh& mesh, const std::string& op_hash,
               const std::string& path);
certify::BoundMesh load_mesh(const std::string& path);

// Lyapunov certificates store the anchor, P, and the residual; phi is
// rebuilt against the operator on load (hash-checked).
std::string serialize_lyapunov(const lyapunov::LyapunovCertificate& cert,
                               const std::string& op_hash);
lyapunov::LyapunovCertificate load_lyapunov(const std::string& path, const AffineForm& form,
                                            const Tolerances& tol = default_tolerances());
void save_lyapunov(const lyapunov::LyapunovCertificate& cert, const std::string& op_hash,
                   const std::string& path);

// Coverage CSV: mu columns, alpha, alpha_phi1.., covered; 12 significant digits.
std::string coverage_csv(const lyapunov::CoverageReport& report);
// Scenario CSV: mu1, alpha, alpha_phi1, alpha_phi2, ...; 12 significant digits.
std::string scenario_csv(const std::vector<demo::ScenarioRow>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace stabcert::io
