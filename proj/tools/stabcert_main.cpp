// stabcert: coercivity certification for affinely parameter-dependent
// operators. Subcommands: alpha, certify, mesh, query, lyapunov, scenario,
// export-op. Exit codes: 0 success/stable, 1 usage or I/O error, 2 unstable,
// 3 inconclusive, 4 query outside the certified cover.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stabcert/affine_form.hpp"
#include "stabcert/certify.hpp"
#include "stabcert/demo_fem.hpp"
#include "stabcert/errors.hpp"
#include "stabcert/json_io.hpp"
#include "stabcert/lyapunov.hpp"
#include "stabcert/version.hpp"

namespace {

using namespace stabcert;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnstable = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitQuery = 4;

Vector parse_csv_doubles(const std::string& text, const char* what) {
  Vector out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw IoError(std::string(what) + ": cannot parse '" + token + "' as a number");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

certify::ParameterBox parse_domain(const std::string& text) {
  certify::ParameterBox box;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t colon = token.find(':');
    if (colon == std::string::npos)
      throw IoError("domain: expected 'lo:hi' pairs separated by commas, got '" + token + "'");
    try {
      const double lo = std::stod(token.substr(0, colon));
      const double hi = std::stod(token.substr(colon + 1));
      box.intervals.push_back({lo, hi});
    } catch (const std::exception&) {
      throw IoError("domain: cannot parse interval '" + token + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  box.validate();
  return box;
}

std::vector<Vector> parse_point_list(const std::string& text, const char* what) {
  std::vector<Vector> points;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t semi = text.find(';', pos);
    const std::string token = text.substr(pos, semi == std::string::npos ? semi : semi - pos);
    if (!token.empty()) points.push_back(parse_csv_doubles(token, what));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  if (points.empty()) throw IoError(std::string(what) + ": empty point list");
  return points;
}

struct OperatorSource {
  std::string op_path;
  std::size_t demo_n = 0;

  void attach(CLI::App* cmd) {
    auto* op = cmd->add_option("--op", op_path, "operator JSON file");
    auto* demo_opt = cmd->add_option("--demo-fem", demo_n,
                                     "built-in diffusion-convection-reaction demo with N unknowns");
    op->excludes(demo_opt);
  }

  AffineForm load() const {
    if (!op_path.empty()) return io::load_operator(op_path);
    if (demo_n > 0) return demo::assemble_fem({demo_n});
    throw IoError("no operator given: use --op FILE or --demo-fem N");
  }
};

void print_point(const char* label, const Vector& v) {
  std::printf("%s [", label);
  for (std::size_t i = 0; i < v.size(); ++i)
    std::printf("%s%.12g", i ? ", " : "", v[i]);
  std::printf("]\n");
}

int run(int argc, char** argv) {
  CLI::App app{"coercivity and Lyapunov stability certification for affinely "
               "parameter-dependent operators"};
  app.set_version_flag("--version", std::string("stabcert ") + kVersion);
  app.require_subcommand(1);

  // --- alpha ---
  auto* alpha_cmd = app.add_subcommand("alpha", "evaluate the coercivity constant at one point");
  OperatorSource alpha_src;
  alpha_src.attach(alpha_cmd);
  std::string alpha_mu, alpha_psi;
  alpha_cmd->add_option("--mu", alpha_mu, "parameter point, comma separated");
  alpha_cmd->add_option("--psi", alpha_psi, "coefficient point, comma separated");

  // --- certify ---
  auto* certify_cmd =
      app.add_subcommand("certify", "prove or disprove coercivity over a parameter box");
  OperatorSource certify_src;
  certify_src.attach(certify_cmd);
  std::string certify_domain;
  double certify_margin = 1e-9;
  std::size_t certify_budget = 200;
  std::size_t certify_resolution = 1;
  std::string certify_out;
  certify_cmd->add_option("--domain", certify_domain, "parameter box lo:hi,lo:hi,...")
      ->required();
  certify_cmd->add_option("--margin", certify_margin, "positivity margin (default 1e-9)");
  certify_cmd->add_option("--budget", certify_budget, "adaptive evaluation budget");
  certify_cmd->add_option("--resolution", certify_resolution, "initial facet subdivisions");
  certify_cmd->add_option("--out", certify_out, "certificate JSON output path");

  // --- mesh ---
  auto* mesh_cmd = app.add_subcommand("mesh", "build an adaptive lower-bound mesh over Theta(D)");
  OperatorSource mesh_src;
  mesh_src.attach(mesh_cmd);
  std::string mesh_domain, mesh_out;
  certify::MeshBuildOptions mesh_opt;
  mesh_cmd->add_option("--domain", mesh_domain, "parameter box lo:hi,lo:hi,...")->required();
  mesh_cmd->add_option("--tol", mesh_opt.gap_tol, "gap tolerance (default 0.05)");
  mesh_cmd->add_option("--budget", mesh_opt.budget, "vertex evaluation budget");
  mesh_cmd->add_flag("--use-scm", mesh_opt.use_scm, "maintain an SCM state for upper bounds");
  mesh_cmd->add_flag("--scm-vertices", mesh_opt.scm_vertices,
                     "value mesh vertices by SCM lower bounds (requires --use-scm)");
  mesh_cmd->add_option("--scm-budget", mesh_opt.scm_budget, "SCM enrichment evaluations");
  mesh_cmd->add_option("--out", mesh_out, "mesh JSON output path")->required();

  // --- query ---
  auto* query_cmd = app.add_subcommand("query", "query a mesh certificate for a lower bound");
  std::string query_mesh, query_mu, query_psi;
  query_cmd->add_option("--mesh", query_mesh, "mesh JSON file")->required();
  query_cmd->add_option("--mu", query_mu, "parameter point");
  query_cmd->add_option("--psi", query_psi, "coefficient point");

  // --- lyapunov ---
  auto* lyap_cmd =
      app.add_subcommand("lyapunov", "build Lyapunov certificates and a coverage report");
  OperatorSource lyap_src;
  lyap_src.attach(lyap_cmd);
  std::string lyap_domain, lyap_anchors, lyap_csv, lyap_certs_out;
  std::vector<std::string> lyap_hulls;
  std::size_t lyap_grid = 61;
  lyap_cmd->add_option("--domain", lyap_domain, "parameter box lo:hi,lo:hi,...")->required();
  lyap_cmd->add_option("--anchors", lyap_anchors,
                       "anchor points mu*, e.g. '20,0;28.25,0' (omit for the symmetric path)");
  lyap_cmd->add_option("--grid", lyap_grid, "grid resolution per free coordinate (default 61)");
  lyap_cmd->add_option("--csv", lyap_csv, "coverage CSV output path");
  lyap_cmd->add_option("--certs-out", lyap_certs_out, "prefix for certificate JSON files");
  lyap_cmd->add_option("--hull", lyap_hulls,
                       "mu vertex set 'p1;p2;...' for a convex-hull certificate (repeatable)");

  // --- scenario ---
  auto* scen_cmd = app.add_subcommand(
      "scenario", "coercivity constants along a fixed-mu2 line (CSV: mu1, alpha, alpha_phi...)");
  OperatorSource scen_src;
  scen_src.attach(scen_cmd);
  double scen_mu2 = 0.0;
  std::string scen_range = "0:30";
  std::size_t scen_grid = 61;
  std::string scen_anchors, scen_out;
  scen_cmd->add_option("--mu2", scen_mu2, "fixed mu2 value")->required();
  scen_cmd->add_option("--mu1-range", scen_range, "mu1 range lo:hi (default 0:30)");
  scen_cmd->add_option("--grid", scen_grid, "number of mu1 grid points (default 61)");
  scen_cmd->add_option("--anchors", scen_anchors, "Lyapunov anchors, e.g. '20,0;28.25,0'");
  scen_cmd->add_option("--out", scen_out, "CSV output path")->required();

  // --- export-op ---
  auto* export_cmd = app.add_subcommand("export-op", "write an operator JSON file");
  OperatorSource export_src;
  export_src.attach(export_cmd);
  std::string export_out;
  export_cmd->add_option("--out", export_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  if (alpha_cmd->parsed()) {
    const AffineForm form = alpha_src.load();
    CoercivityResult result;
    if (!alpha_psi.empty()) {
      result = alpha_theta(form, parse_csv_doubles(alpha_psi, "--psi"));
    } else if (!alpha_mu.empty()) {
      result = alpha(form, parse_csv_doubles(alpha_mu, "--mu"));
    } else {
      throw IoError("alpha: give --mu or --psi");
    }
    std::printf("alpha = %.12g\n", result.alpha);
    print_point("y =", result.y_point);
    return kExitOk;
  }

  if (certify_cmd->parsed()) {
    const AffineForm form = certify_src.load();
    const auto cert = certify::certify_stability(form, parse_domain(certify_domain),
                                                 certify_margin, certify_budget,
                                                 certify_resolution);
    std::printf("verdict: %s\n", certify::to_string(cert.verdict));
    if (cert.verdict == certify::Verdict::Unstable) {
      std::printf("witness alpha = %.12g\n", *cert.witness_alpha);
      print_point("witness psi =", *cert.witness_psi);
      if (cert.witness_mu.has_value()) print_point("witness mu =", *cert.witness_mu);
    }
    if (!certify_out.empty()) {
      io::save_certificate(cert, io::operator_hash(form), certify_out);
      std::printf("certificate written to %s\n", certify_out.c_str());
    }
    switch (cert.verdict) {
      case certify::Verdict::Stable: return kExitOk;
      case certify::Verdict::Unstable: return kExitUnstable;
      case certify::Verdict::Inconclusive: return kExitInconclusive;
    }
  }

  if (mesh_cmd->parsed()) {
    const AffineForm form = mesh_src.load();
    const auto mesh = certify::build_bound_mesh(form, parse_domain(mesh_domain), mesh_opt);
    io::save_mesh(mesh, io::operator_hash(form), mesh_out);
    std::printf("mesh: %zu vertices, %zu simplices, %zu evaluations, tol %s\n",
                mesh.vertices.size(), mesh.simplices.size(), mesh.evaluations,
                mesh.tol_met ? "met" : "NOT met (budget exhausted)");
    std::printf("mesh written to %s\n", mesh_out.c_str());
    return kExitOk;
  }

  if (query_cmd->parsed()) {
    const auto mesh = io::load_mesh(query_mesh);
    double bound = 0.0;
    try {
      if (!query_psi.empty()) {
        bound = certify::query_lower_bound_psi(mesh, parse_csv_doubles(query_psi, "--psi"));
      } else if (!query_mu.empty()) {
        bound = certify::query_lower_bound(mesh, parse_csv_doubles(query_mu, "--mu"));
      } else {
        throw IoError("query: give --mu or --psi");
      }
    } catch (const OutsideCover& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitQuery;
    }
    std::printf("lower_bound = %.12g\n", bound);
    return kExitOk;
  }

  if (lyap_cmd->parsed()) {
    const AffineForm form = lyap_src.load();
    const certify::ParameterBox domain = parse_domain(lyap_domain);
    const std::string hash = io::operator_hash(form);

    if (lyap_anchors.empty()) {
      // Symmetric-operator path: alpha's sign decides directly.
      const auto report = lyapunov::coverage_report(form, {}, domain, lyap_grid);
      std::size_t stable = 0;
      for (const auto& row : report.rows) {
        const auto verdict = lyapunov::symmetric_stability(form, row.mu);
        if (verdict != lyapunov::SymmetricVerdict::Unstable) ++stable;
      }
      std::printf("symmetric path: %zu/%zu grid points Lyapunov stable\n", stable,
                  report.rows.size());
      if (!lyap_csv.empty()) {
        io::write_file(lyap_csv, io::coverage_csv(report));
        std::printf("coverage written to %s\n", lyap_csv.c_str());
      }
      return stable == report.rows.size() ? kExitOk : kExitUnstable;
    }

    std::vector<lyapunov::LyapunovCertificate> certs;
    for (const Vector& anchor : parse_point_list(lyap_anchors, "--anchors"))
      certs.push_back(lyapunov::build_p(form, anchor));
    for (std::size_t i = 0; i < certs.size(); ++i) {
      std::printf("certificate %zu: anchor", i + 1);
      for (double v : certs[i].mu_star) std::printf(" %.12g", v);
      std::printf(", residual %.3e\n", certs[i].residual);
      if (!lyap_certs_out.empty()) {
        const std::string path = lyap_certs_out + "_" + std::to_string(i + 1) + ".json";
        io::save_lyapunov(certs[i], hash, path);
        std::printf("  written to %s\n", path.c_str());
      }
    }
    std::vector<std::vector<Vector>> hull_sets;
    for (const std::string& hull : lyap_hulls)
      hull_sets.push_back(parse_point_list(hull, "--hull"));
    const auto report = lyapunov::coverage_report(form, certs, domain, lyap_grid, hull_sets);
    std::printf("coverage: %zu/%zu grid points covered\n",
                report.rows.size() - report.uncovered.size(), report.rows.size());
    for (std::size_t idx : report.uncovered) {
      print_point("uncovered mu =", report.rows[idx].mu);
    }
    for (std::size_t i = 0; i < report.hulls.size(); ++i)
      std::printf("hull %zu: bound %.12g (%s)\n", i + 1, report.hulls[i].bound,
                  report.hulls[i].proven ? "proven coercive" : "not proven");
    if (!lyap_csv.empty()) {
      io::write_file(lyap_csv, io::coverage_csv(report));
      std::printf("coverage written to %s\n", lyap_csv.c_str());
    }
    return report.fully_covered ? kExitOk : kExitUnstable;
  }

  if (scen_cmd->parsed()) {
    const AffineForm form = scen_src.load();
    std::vector<lyapunov::LyapunovCertificate> certs;
    if (!scen_anchors.empty())
      for (const Vector& anchor : parse_point_list(scen_anchors, "--anchors"))
        certs.push_back(lyapunov::build_p(form, anchor));
    const std::size_t colon = scen_range.find(':');
    if (colon == std::string::npos) throw IoError("--mu1-range: expected lo:hi");
    const double lo = std::stod(scen_range.substr(0, colon));
    const double hi = std::stod(scen_range.substr(colon + 1));
    if (scen_grid < 2) throw IoError("--grid must be at least 2");
    Vector grid(scen_grid);
    for (std::size_t k = 0; k < scen_grid; ++k)
      grid[k] = lo + (hi - lo) * (static_cast<double>(k) / static_cast<double>(scen_grid - 1));
    const auto rows = demo::scenario_curve(form, scen_mu2, grid, certs);
    io::write_file(scen_out, io::scenario_csv(rows));
    std::printf("scenario written to %s\n", scen_out.c_str());
    return kExitOk;
  }

  if (export_cmd->parsed()) {
    const AffineForm form = export_src.load();
    io::save_operator(form, export_out);
    std::printf("operator written to %s (hash %s)\n", export_out.c_str(),
                io::operator_hash(form).c_str());
    return kExitOk;
  }

  return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const stabcert::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
