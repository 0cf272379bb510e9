#include "stabcert/json_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stabcert/errors.hpp"
#include "stabcert/version.hpp"

namespace stabcert::io {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (j.is_array()) {
    if (j.empty() || !j.front().is_array())
      throw IoError(std::string(what) + ": dense matrix must be a list of row lists");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      const json& row = j.at(i);
      if (!row.is_array() || row.size() != cols)
        throw IoError(std::string(what) + ": ragged dense matrix");
      for (std::size_t c = 0; c < cols; ++c) m(i, c) = row.at(c).get<double>();
    }
    return m;
  }
  if (j.is_object() && j.contains("coo")) {
    const std::size_t rows = j.at("rows").get<std::size_t>();
    const std::size_t cols = j.at("cols").get<std::size_t>();
    Matrix m(rows, cols);
    for (const json& triple : j.at("coo")) {
      if (!triple.is_array() || triple.size() != 3)
        throw IoError(std::string(what) + ": COO entries must be [i, j, value] triples");
      const std::size_t i = triple.at(0).get<std::size_t>();
      const std::size_t c = triple.at(1).get<std::size_t>();
      if (i >= rows || c >= cols)
        throw IoError(std::string(what) + ": COO index out of range");
      m(i, c) += triple.at(2).get<double>();
    }
    return m;
  }
  throw IoError(std::string(what) + ": matrix must be dense rows or a COO object");
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Vector vector_from_json(const json& j) {
  Vector v;
  v.reserve(j.size());
  for (const json& x : j) v.push_back(x.get<double>());
  return v;
}

json intervals_to_json(const std::vector<certify::Interval>& ivs) {
  json arr = json::array();
  for (const certify::Interval& iv : ivs) arr.push_back(json::array({iv.lo, iv.hi}));
  return arr;
}

std::vector<certify::Interval> intervals_from_json(const json& j) {
  std::vector<certify::Interval> ivs;
  for (const json& pair : j) ivs.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  return ivs;
}

json parse_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError(std::string(what) + ": malformed JSON");
  return j;
}

// Runs a JSON-reading body and reports schema violations as IoError.
template <typename Fn>
auto with_schema(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw IoError(std::string(what) + ": " + e.what());
  }
}

void check_kind(const json& j, const char* kind) {
  if (!j.is_object() || j.value("kind", std::string{}) != kind)
    throw IoError(std::string("expected a '") + kind + "' file");
}

} // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string serialize_operator(const AffineForm& form) {
  json j;
  j["format_version"] = kFormatVersion;
  j["n"] = form.n;
  j["p"] = form.theta_map.p;
  j["theta"] = form.theta_map.sources();
  json terms = json::array();
  for (const Matrix& t : form.terms) terms.push_back(matrix_to_json(t));
  j["terms"] = std::move(terms);
  j["x_norm"] = matrix_to_json(form.x_norm);
  if (form.v_inner.has_value()) j["v_inner"] = matrix_to_json(*form.v_inner);
  return j.dump(2) + "\n";
}

AffineForm parse_operator(const std::string& text) {
  const json j = parse_text(text, "operator");
  if (!j.is_object()) throw IoError("operator: expected a JSON object");
  return with_schema("operator", [&] {
  AffineForm form;
  form.n = j.at("n").get<std::size_t>();
  const int p = j.at("p").get<int>();
  std::vector<std::string> sources;
  for (const json& s : j.at("theta")) sources.push_back(s.get<std::string>());
  form.theta_map = theta::ThetaMap::parse(sources, p);
  for (const json& t : j.at("terms")) form.terms.push_back(matrix_from_json(t, "operator term"));
  form.x_norm = matrix_from_json(j.at("x_norm"), "x_norm");
  if (j.contains("v_inner")) form.v_inner = matrix_from_json(j.at("v_inner"), "v_inner");
  form.validate();
  return form;
  });
}

AffineForm load_operator(const std::string& path) { return parse_operator(read_file(path)); }

void save_operator(const AffineForm& form, const std::string& path) {
  write_file(path, serialize_operator(form));
}

std::string operator_hash(const AffineForm& form) {
  const std::string canon = serialize_operator(form);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

// --- stability certificates ---

std::string serialize_certificate(const certify::StabilityCertificate& cert,
                                  const std::string& op_hash) {
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kVersion;
  j["kind"] = "stability_certificate";
  j["operator_hash"] = op_hash;
  j["verdict"] = certify::to_string(cert.verdict);
  j["margin"] = cert.margin;
  j["budget"] = cert.budget;
  j["adaptive_evaluations"] = cert.adaptive_evaluations;
  j["resolution"] = cert.resolution;
  if (cert.witness_psi.has_value()) {
    j["witness"]["psi"] = vector_to_json(*cert.witness_psi);
    j["witness"]["alpha"] = *cert.witness_alpha;
    if (cert.witness_mu.has_value()) j["witness"]["mu"] = vector_to_json(*cert.witness_mu);
  }
  json pts = json::array();
  for (const certify::EvaluatedPoint& pt : cert.evaluated) {
    json p;
    p["psi"] = vector_to_json(pt.psi);
    p["alpha"] = pt.alpha;
    p["y"] = vector_to_json(pt.y_point);
    p["on_image"] = pt.on_image;
    if (pt.mu.has_value()) p["mu"] = vector_to_json(*pt.mu);
    pts.push_back(std::move(p));
  }
  j["evaluated"] = std::move(pts);
  json cells = json::array();
  for (const certify::CellRecord& c : cert.cells) {
    json jc;
    jc["mu_box"] = intervals_to_json(c.mu_box);
    jc["vertices"] = c.vertex_ids;
    jc["bound"] = c.bound;
    jc["construction"] = c.construction;
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

certify::StabilityCertificate parse_certificate(const std::string& text) {
  const json j = parse_text(text, "certificate");
  check_kind(j, "stability_certificate");
  return with_schema("certificate", [&] {
  certify::StabilityCertificate cert;
  const std::string verdict = j.at("verdict").get<std::string>();
  if (verdict == "stable") cert.verdict = certify::Verdict::Stable;
  else if (verdict == "unstable") cert.verdict = certify::Verdict::Unstable;
  else cert.verdict = certify::Verdict::Inconclusive;
  cert.margin = j.at("margin").get<double>();
  cert.budget = j.at("budget").get<std::size_t>();
  cert.adaptive_evaluations = j.at("adaptive_evaluations").get<std::size_t>();
  cert.resolution = j.at("resolution").get<std::size_t>();
  if (j.contains("witness")) {
    cert.witness_psi = vector_from_json(j.at("witness").at("psi"));
    cert.witness_alpha = j.at("witness").at("alpha").get<double>();
    if (j.at("witness").contains("mu"))
      cert.witness_mu = vector_from_json(j.at("witness").at("mu"));
  }
  for (const json& p : j.at("evaluated")) {
    certify::EvaluatedPoint pt;
    pt.psi = vector_from_json(p.at("psi"));
    pt.alpha = p.at("alpha").get<double>();
    pt.y_point = vector_from_json(p.at("y"));
    pt.on_image = p.at("on_image").get<bool>();
    if (p.contains("mu")) pt.mu = vector_from_json(p.at("mu"));
    cert.evaluated.push_back(std::move(pt));
  }
  for (const json& c : j.at("cells")) {
    certify::CellRecord rec;
    rec.mu_box = intervals_from_json(c.at("mu_box"));
    rec.vertex_ids = c.at("vertices").get<std::vector<std::size_t>>();
    rec.bound = c.at("bound").get<double>();
    rec.construction = c.at("construction").get<std::string>();
    cert.cells.push_back(std::move(rec));
  }
  return cert;
  });
}

void save_certificate(const certify::StabilityCertificate& cert, const std::string& op_hash,
                      const std::string& path) {
  write_file(path, serialize_certificate(cert, op_hash));
}

certify::StabilityCertificate load_certificate(const std::string& path) {
  return parse_certificate(read_file(path));
}

// --- bound meshes ---

std::string serialize_mesh(const certify::BoundMesh& mesh, const std::string& op_hash) {
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kVersion;
  j["kind"] = "bound_mesh";
  j["operator_hash"] = op_hash;
  j["gap_tol"] = mesh.gap_tol;
  j["tol_met"] = mesh.tol_met;
  j["evaluations"] = mesh.evaluations;
  j["theta"] = mesh.theta_sources;
  j["p"] = mesh.theta_p;
  j["domain"] = intervals_to_json(mesh.domain);
  j["used_scm"] = mesh.used_scm;
  j["scm_vertices"] = mesh.scm_vertices;
  json verts = json::array();
  for (const certify::MeshVertex& v : mesh.vertices) {
    json jv;
    jv["psi"] = vector_to_json(v.psi);
    jv["value"] = v.value;
    jv["provenance"] = v.exact ? "exact" : "scm";
    verts.push_back(std::move(jv));
  }
  j["vertices"] = std::move(verts);
  json simps = json::array();
  for (const certify::MeshSimplex& s : mesh.simplices) {
    json js;
    js["v"] = s.v;
    js["gap"] = s.gap;
    js["splittable"] = s.splittable;
    simps.push_back(std::move(js));
  }
  j["simplices"] = std::move(simps);
  json bank = json::array();
  for (const Vector& y : mesh.y_bank) bank.push_back(vector_to_json(y));
  j["y_bank"] = std::move(bank);
  return j.dump(2) + "\n";
}

certify::BoundMesh parse_mesh(const std::string& text) {
  const json j = parse_text(text, "mesh");
  check_kind(j, "bound_mesh");
  return with_schema("mesh", [&] {
  certify::BoundMesh mesh;
  mesh.gap_tol = j.at("gap_tol").get<double>();
  mesh.tol_met = j.at("tol_met").get<bool>();
  mesh.evaluations = j.at("evaluations").get<std::size_t>();
  mesh.theta_sources = j.at("theta").get<std::vector<std::string>>();
  mesh.theta_p = j.at("p").get<int>();
  mesh.domain = intervals_from_json(j.at("domain"));
  mesh.used_scm = j.at("used_scm").get<bool>();
  mesh.scm_vertices = j.at("scm_vertices").get<bool>();
  for (const json& v : j.at("vertices")) {
    certify::MeshVertex mv;
    mv.psi = vector_from_json(v.at("psi"));
    mv.value = v.at("value").get<double>();
    mv.exact = v.at("provenance").get<std::string>() == "exact";
    mesh.vertices.push_back(std::move(mv));
  }
  for (const json& s : j.at("simplices")) {
    certify::MeshSimplex ms;
    ms.v = s.at("v").get<std::vector<std::size_t>>();
    ms.gap = s.at("gap").get<double>();
    ms.splittable = s.at("splittable").get<bool>();
    mesh.simplices.push_back(std::move(ms));
  }
  for (const json& y : j.at("y_bank")) mesh.y_bank.push_back(vector_from_json(y));
  return mesh;
  });
}

void save_mesh(const certify::BoundMesh& mesh, const std::string& op_hash,
               const std::string& path) {
  write_file(path, serialize_mesh(mesh, op_hash));
}

certify::BoundMesh load_mesh(const std::string& path) { return parse_mesh(read_file(path)); }

// --- Lyapunov certificates ---

std::string serialize_lyapunov(const lyapunov::LyapunovCertificate& cert,
                               const std::string& op_hash) {
  json j;
  j["format_version"] = kFormatVersion;
  j["tool_version"] = kVersion;
  j["kind"] = "lyapunov_certificate";
  j["operator_hash"] = op_hash;
  j["mu_star"] = vector_to_json(cert.mu_star);
  j["p_matrix"] = matrix_to_json(cert.p);
  j["residual"] = cert.residual;
  return j.dump(2) + "\n";
}

void save_lyapunov(const lyapunov::LyapunovCertificate& cert, const std::string& op_hash,
                   const std::string& path) {
  write_file(path, serialize_lyapunov(cert, op_hash));
}

lyapunov::LyapunovCertificate load_lyapunov(const std::string& path, const AffineForm& form,
                                            const Tolerances& tol) {
  const json j = parse_text(read_file(path), "lyapunov certificate");
  check_kind(j, "lyapunov_certificate");
  return with_schema("lyapunov certificate", [&] {
  if (j.at("operator_hash").get<std::string>() != operator_hash(form))
    throw IoError("lyapunov certificate '" + path + "' was built for a different operator");
  const Vector mu_star = vector_from_json(j.at("mu_star"));
  const Matrix p = matrix_from_json(j.at("p_matrix"), "p_matrix");
  lyapunov::LyapunovCertificate cert = lyapunov::certificate_from_p(form, mu_star, p, tol);
  cert.residual = j.at("residual").get<double>();
  return cert;
  });
}

// --- CSV ---

namespace {

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

} // namespace

std::string coverage_csv(const lyapunov::CoverageReport& report) {
  std::ostringstream out;
  const std::size_t p = report.rows.empty() ? 0 : report.rows.front().mu.size();
  const std::size_t certs = report.rows.empty() ? 0 : report.rows.front().alpha_phi.size();
  for (std::size_t i = 0; i < p; ++i) out << "mu" << (i + 1) << ",";
  out << "alpha";
  for (std::size_t i = 0; i < certs; ++i) out << ",alpha_phi" << (i + 1);
  out << ",covered\n";
  for (const lyapunov::CoverageRow& row : report.rows) {
    for (double m : row.mu) out << fmt12(m) << ",";
    out << fmt12(row.alpha);
    for (double v : row.alpha_phi) out << "," << fmt12(v);
    out << "," << (row.covered ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string scenario_csv(const std::vector<demo::ScenarioRow>& rows) {
  std::ostringstream out;
  const std::size_t certs = rows.empty() ? 0 : rows.front().alpha_phi.size();
  out << "mu1,alpha";
  for (std::size_t i = 0; i < certs; ++i) out << ",alpha_phi" << (i + 1);
  out << "\n";
  for (const demo::ScenarioRow& row : rows) {
    out << fmt12(row.mu1) << "," << fmt12(row.alpha);
    for (double v : row.alpha_phi) out << "," << fmt12(v);
    out << "\n";
  }
  return out.str();
}

} // namespace stabcert::io
