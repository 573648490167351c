#include "commands.hpp"

#include "nahm/parallel.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace nahm::cli {

namespace {

constexpr const char* kReportFormat = "nahm-report/1";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NahmError("ConfigParse", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw NahmError("ConfigParse", "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<Vec3> points_from_json(const json& j) {
  std::vector<Vec3> out;
  for (const auto& p : j) out.push_back(vec3_from_json(p));
  return out;
}

json base_report(const RunConfig& rc, const std::string& command) {
  return {{"format", kReportFormat},
          {"data_version", kNahmDataVersion},
          {"command", command},
          {"input_hash", rc.input_hash},
          {"config_hash", rc.config_hash}};
}

void finish(Outcome& o, const VerificationReport& rep) {
  json r = to_json(rep);
  o.report["pass"] = r["pass"];
  o.report["checks"] = r["checks"];
  if (o.code == kPass && !rep.pass()) o.code = kFail;
}

// Loads the data; on a verification error records it and returns nullopt.
std::optional<NahmData> load_data(const RunConfig& rc, VerificationReport& rep) {
  try {
    return nahm_from_json(rc.data_doc);
  } catch (const NahmError& e) {
    if (e.code() == "ConfigParse") throw;
    rep.add(e.code(), false, 0, 0, e.what());
    return std::nullopt;
  }
}

std::string join_positions(const RVec& e) {
  std::string s;
  for (int k = 0; k < e.size(); ++k) {
    if (k) s += ';';
    s += fmt_double(e(k));
  }
  return s;
}

json vec_json(const Vec3& x) { return json::array({x[0], x[1], x[2]}); }

}  // namespace

double FdRule::step(const Vec3& x) const {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  switch (kind) {
    case Fixed:
      return value;
    case Relative:
      return value * std::max(1.0, r);
    default:
      return default_fd_step(x);
  }
}

FdRule parse_fd_rule(const std::string& s) {
  FdRule r;
  auto number = [&](const std::string& t) {
    try {
      size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size() || !(v > 0)) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw NahmError("ConfigParse", "bad --fd-step rule '" + s + "'");
    }
  };
  if (s.empty() || s == "auto") return r;
  if (s.rfind("fixed:", 0) == 0) {
    r.kind = FdRule::Fixed;
    r.value = number(s.substr(6));
  } else if (s.rfind("rel:", 0) == 0) {
    r.kind = FdRule::Relative;
    r.value = number(s.substr(4));
  } else {
    r.kind = FdRule::Fixed;
    r.value = number(s);
  }
  return r;
}

std::vector<Vec3> grid_points(const json& spec, std::uint64_t seed) {
  if (spec.contains("points")) return points_from_json(spec.at("points"));
  if (spec.contains("random")) {
    const auto& r = spec.at("random");
    const int count = r.at("count").get<int>();
    const double radius = r.value("radius", 1.0);
    if (count < 1 || !(radius > 0)) throw NahmError("ConfigParse", "random grid needs count >= 1 and radius > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<Vec3> out;
    while (static_cast<int>(out.size()) < count) {
      Vec3 x{u(rng), u(rng), u(rng)};
      if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] <= radius * radius) out.push_back(x);
    }
    return out;
  }
  const Vec3 lo = vec3_from_json(spec.at("lo")), hi = vec3_from_json(spec.at("hi"));
  const auto counts = spec.at("counts").get<std::vector<int>>();
  if (counts.size() != 3) throw NahmError("ConfigParse", "grid counts must have three entries");
  for (int c : counts)
    if (c < 1) throw NahmError("ConfigParse", "grid counts must be >= 1");
  auto coord = [&](int a, int i) { return counts[a] == 1 ? 0.5 * (lo[a] + hi[a]) : lo[a] + (hi[a] - lo[a]) * i / (counts[a] - 1); };
  std::vector<Vec3> out;
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) out.push_back({coord(0, i), coord(1, j), coord(2, k)});
  return out;
}

RunConfig load_config(const Flags& f) {
  if (f.config.empty()) throw NahmError("ConfigParse", "--config is required");
  const std::string text = read_file(f.config);
  RunConfig rc;
  rc.config_hash = hex64(fnv1a64(text));
  try {
    json cfg = json::parse(text);
    if (!cfg.is_object()) throw NahmError("ConfigParse", "config must be a JSON object");
    std::string data_text = text;
    if (cfg.value("version", std::string()) == kNahmDataVersion) {
      rc.data_doc = cfg;
    } else if (cfg.contains("data")) {
      const json& d = cfg.at("data");
      if (d.is_string()) {
        std::filesystem::path p(d.get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(f.config).parent_path() / p;
        data_text = read_file(p.string());
        rc.data_doc = json::parse(data_text);
      } else {
        rc.data_doc = d;
        data_text = d.dump();
      }
    } else {
      throw NahmError("ConfigParse", std::string("config is neither a ") + kNahmDataVersion + " document nor has 'data'");
    }
    rc.input_hash = hex64(fnv1a64(data_text));

    rc.seed = f.seed_set ? f.seed : cfg.value("seed", std::uint64_t{0});
    rc.workers = f.workers;
    if (rc.workers < 1) throw NahmError("ConfigParse", "--workers must be >= 1");
    if (rc.data_doc.is_object() && !rc.data_doc.contains("framing") && !rc.data_doc.contains("framing_seed"))
      rc.data_doc["framing_seed"] = rc.seed;

    if (cfg.contains("solver")) {
      const auto& s = cfg.at("solver");
      rc.solver.degree = s.value("degree", rc.solver.degree);
      rc.solver.panels_per_half = s.value("panels_per_half", rc.solver.panels_per_half);
      rc.solver.collar_rel = s.value("collar", rc.solver.collar_rel);
      rc.solver.min_gap = s.value("min_gap", rc.solver.min_gap);
    }
    if (f.nodes > 0) rc.solver.degree = f.nodes;
    if (f.collar > 0) rc.solver.collar_rel = f.collar;
    if (rc.solver.degree < 2) throw NahmError("ConfigParse", "--nodes must be >= 2");
    if (!(rc.solver.collar_rel > 0 && rc.solver.collar_rel < 0.25))
      throw NahmError("ConfigParse", "collar must lie in (0, 0.25)");
    rc.fd = parse_fd_rule(f.fd_step != "auto" ? f.fd_step : cfg.value("fd_step", std::string("auto")));

    if (cfg.contains("tolerances")) {
      const auto& t = cfg.at("tolerances");
      rc.tol.bogomolny = t.value("bogomolny", rc.tol.bogomolny);
      rc.tol.dphi = t.value("dphi", rc.tol.dphi);
      rc.tol.nahm_residual = t.value("nahm_residual", rc.tol.nahm_residual);
      rc.tol.lax = t.value("lax", rc.tol.lax);
      rc.tol.fit_lambda = t.value("fit_lambda", rc.tol.fit_lambda);
      rc.tol.fit_k = t.value("fit_k", rc.tol.fit_k);
      rc.tol.structure = t.value("structure", rc.tol.structure);
      for (double v : {rc.tol.bogomolny, rc.tol.dphi, rc.tol.nahm_residual, rc.tol.lax, rc.tol.fit_lambda,
                       rc.tol.fit_k, rc.tol.structure})
        if (!(v > 0)) throw NahmError("ConfigParse", "tolerances must be positive");
    }
    json grid = cfg.value("grid", json{{"lo", {-1, -1, -1}}, {"hi", {1, 1, 1}}, {"counts", {3, 3, 3}}});
    rc.points = grid_points(grid, rc.seed);
    if (cfg.contains("ray")) {
      const auto& r = cfg.at("ray");
      if (r.contains("direction")) rc.ray_direction = vec3_from_json(r.at("direction"));
      if (r.contains("radii")) rc.ray_radii = r.at("radii").get<std::vector<double>>();
    }
    if (cfg.contains("reduce")) {
      const auto& r = cfg.at("reduce");
      rc.reduce_kind = r.value("kind", rc.reduce_kind);
      if (r.contains("points")) rc.reduce_points = points_from_json(r.at("points"));
    }
    if (rc.reduce_kind != "so" && rc.reduce_kind != "sp")
      throw NahmError("ConfigParse", "reduce kind must be 'so' or 'sp'");
    if (cfg.contains("claimed_type")) rc.claimed_type = type_from_json(cfg.at("claimed_type"));
  } catch (const json::exception& e) {
    throw NahmError("ConfigParse", e.what());
  }
  return rc;
}

Outcome cmd_validate(const RunConfig& rc) {
  Outcome o;
  o.report = base_report(rc, "validate");
  VerificationReport rep;
  auto nd = load_data(rc, rep);
  if (nd) {
    rep.add("type", true, 0, 0, "N = " + std::to_string(nd->inv.N));
    rep.merge(validate_framing(nd->type, nd->framing));
    std::vector<double> samples;
    for (const auto& iv : nd->intervals)
      for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) samples.push_back(iv.lo + s * (iv.hi - iv.lo));
    rep.bound("nahm_residual", nahm_residual(*nd, samples), rc.tol.nahm_residual);
    rep.merge(check_pole_structure(*nd));
    rep.merge(check_jump_data(*nd).report);
    const std::vector<cd> zetas{cd(0, 0), cd(0.3, -0.2), cd(-0.5, 0.7)};
    rep.bound("lax_drift", lax_drift(lax_invariants(*nd, zetas, samples)), rc.tol.lax);
    o.report["family"] = nd->family;
    o.report["N"] = nd->inv.N;
    auto e = energy(nd->type);
    o.report["energy"] = {{"mass_form", e.mass_form}, {"charge_form", e.charge_form}};
  }
  finish(o, rep);
  return o;
}

Outcome cmd_field(const RunConfig& rc) {
  Outcome o;
  o.report = base_report(rc, "field");
  VerificationReport rep;
  auto nd = load_data(rc, rep);
  if (nd) {
    auto g = std::make_shared<const FiberGrid>(make_grid(*nd, rc.solver));
    const int P = static_cast<int>(rc.points.size());
    std::vector<std::string> rows(P);
    std::vector<double> bog(P), dm(P);
    try {
      parallel_for(P, rc.workers, [&](int i) {
        const Vec3& x = rc.points[i];
        const double h = rc.fd.step(x);
        FieldSample s;
        try {
          s = sample_fields(*nd, x, g, h);
        } catch (const NahmError& e) {
          throw NahmError(e.code(), "point " + std::to_string(i) + ": " + e.what());
        }
        bog[i] = s.bogomolny_residual;
        dm[i] = s.dphi_mismatch;
        std::string r = std::to_string(i);
        for (double c : x) r += "," + fmt_double(c);
        r += "," + join_positions(s.eigenvalues);
        r += "," + fmt_double(s.phi.trace().imag());
        for (double v : {s.bogomolny_residual, s.cross_f_fd, s.cross_dphi_fd, s.dphi_mismatch, s.green_residual,
                         s.fiber_gap, h})
          r += "," + fmt_double(v);
        rows[i] = r;
      });
      std::string csv = std::string(kFieldHeader) + "\n";
      for (const auto& r : rows) csv += r + "\n";
      o.artifact = csv;
      double worst_b = 0, worst_d = 0;
      for (int i = 0; i < P; ++i) {
        worst_b = std::max(worst_b, bog[i]);
        worst_d = std::max(worst_d, dm[i]);
      }
      rep.bound("field:bogomolny", worst_b, rc.tol.bogomolny);
      rep.bound("field:dphi_green_vs_fd", worst_d, rc.tol.dphi);
      o.report["points"] = P;
      o.report["csv_hash"] = hex64(fnv1a64(csv));
    } catch (const NahmError& e) {
      rep.add(e.code(), false, 0, 0, e.what());
    }
  }
  finish(o, rep);
  return o;
}

Outcome cmd_ray(const RunConfig& rc) {
  Outcome o;
  o.report = base_report(rc, "ray");
  VerificationReport rep;
  auto nd = load_data(rc, rep);
  if (nd) {
    try {
      RayProfile p = ray_profile(*nd, rc.ray_direction, rc.ray_radii, rc.solver, rc.workers);
      BreakingFit fit = fit_mu_kappa(p);
      json branches = json::array();
      for (const auto& b : fit.branches)
        branches.push_back({{"lambda", b.lambda}, {"k", b.k}, {"c", b.c}, {"residual", b.residual}});
      o.report["profile"] = {{"direction", vec_json(p.direction)}, {"radii", p.radii}, {"positions", p.spectra}};
      o.report["fit"] = {{"branches", branches},
                         {"lambda", fit.lambda},
                         {"multiplicity", fit.multiplicity},
                         {"k", fit.k},
                         {"trace", fit.trace}};
      const SymmetryBreakingType& want = rc.claimed_type ? *rc.claimed_type : nd->type;
      o.report["compared_type"] = type_to_json(want);
      rep.merge(compare_fit(fit, want, rc.tol.fit_lambda, rc.tol.fit_k));
    } catch (const NahmError& e) {
      rep.add(e.code(), false, 0, 0, e.what());
    }
  }
  finish(o, rep);
  return o;
}

Outcome cmd_reduce(const RunConfig& rc) {
  Outcome o;
  o.report = base_report(rc, "reduce");
  o.report["kind"] = rc.reduce_kind;
  VerificationReport rep;
  auto nd = load_data(rc, rep);
  if (nd) {
    SymmetryOptions opt;
    opt.solver = rc.solver;
    opt.tol = rc.tol.structure;
    if (!rc.reduce_points.empty()) opt.points = rc.reduce_points;
    json pts = json::array();
    for (const auto& x : opt.points) pts.push_back(vec_json(x));
    o.report["points"] = pts;
    o.report["N"] = nd->inv.N;
    try {
      rep.merge(rc.reduce_kind == "so" ? check_so_symmetry(*nd, opt) : check_sp_symmetry(*nd, opt));
    } catch (const NahmError& e) {
      rep.add(e.code(), false, 0, 0, e.what());
    }
  }
  finish(o, rep);
  return o;
}

Outcome cmd_sweep(const RunConfig& rc) {
  Outcome o;
  o.report = base_report(rc, "sweep");
  VerificationReport rep;
  auto nd = load_data(rc, rep);
  if (nd) {
    auto g = std::make_shared<const FiberGrid>(make_grid(*nd, rc.solver));
    const int P = static_cast<int>(rc.points.size());
    std::vector<std::string> rows(P);
    std::vector<int> bad(P, 0);
    std::vector<double> gap(P, 0);
    parallel_for(P, rc.workers, [&](int i) {
      const Vec3& x = rc.points[i];
      std::string r = std::to_string(i);
      for (double c : x) r += "," + fmt_double(c);
      try {
        Fiber f = compute_fiber(*nd, x, g);
        gap[i] = f.gap;
        r += "," + std::to_string(f.dimension()) + "," + fmt_double(f.gap) + "," + fmt_double(f.gram_residual) + "," +
             join_positions(higgs_eigenvalues(higgs(f))) + ",";
      } catch (const NahmError& e) {
        bad[i] = 1;
        r += ",,,,," + e.code();
      }
      rows[i] = r;
    });
    std::string csv = std::string(kSweepHeader) + "\n";
    int failures = 0;
    double min_gap = 1e300;
    for (int i = 0; i < P; ++i) {
      csv += rows[i] + "\n";
      failures += bad[i];
      if (!bad[i]) min_gap = std::min(min_gap, gap[i]);
    }
    o.artifact = csv;
    rep.add("sweep:fiber_dimension", failures == 0, failures, 0, "points with a failed fiber solve");
    if (failures < P) rep.add("sweep:min_gap", min_gap >= rc.solver.min_gap, min_gap, rc.solver.min_gap);
    o.report["points"] = P;
    o.report["csv_hash"] = hex64(fnv1a64(csv));
  }
  finish(o, rep);
  return o;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nahm transform monopole construction and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  std::string seed_text;
  app.add_option("--config", f.config, "run config or nahm-data/1 document");
  app.add_option("--out", f.out, "output path (CSV for field/sweep, JSON report otherwise)");
  app.add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--nodes", f.nodes, "Lobatto degree per panel")->check(CLI::Range(2, 200));
  app.add_option("--collar", f.collar, "collar width relative to the interval length")->check(CLI::PositiveNumber);
  app.add_option("--fd-step", f.fd_step, "finite-difference step rule: auto | H | fixed:H | rel:C");
  app.add_option("--seed", seed_text, "seed for framings and random grids");
  for (const char* name : {"validate", "field", "ray", "reduce", "sweep"}) app.add_subcommand(name);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kPass;
    }
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  f.command = app.get_subcommands().front()->get_name();
  if (!seed_text.empty()) {
    try {
      size_t used = 0;
      f.seed = std::stoull(seed_text, &used);
      if (used != seed_text.size()) throw std::invalid_argument(seed_text);
      f.seed_set = true;
    } catch (const std::exception&) {
      err << "usage error: bad --seed '" << seed_text << "'\n";
      return kUsage;
    }
  }
  try {
    RunConfig rc = load_config(f);
    Outcome o;
    if (f.command == "validate") o = cmd_validate(rc);
    else if (f.command == "field") o = cmd_field(rc);
    else if (f.command == "ray") o = cmd_ray(rc);
    else if (f.command == "reduce") o = cmd_reduce(rc);
    else o = cmd_sweep(rc);
    const std::string report = o.report.dump(2) + "\n";
    if (!f.out.empty()) {
      std::ofstream file(f.out, std::ios::binary);
      if (!file) {
        err << "cannot write " << f.out << "\n";
        return kUsage;
      }
      file << (o.artifact.empty() ? report : o.artifact);
    }
    out << report;
    if (o.code != kPass) {
      for (const auto& c : o.report["checks"])
        if (!c["pass"].get<bool>()) err << "check failed: " << c["name"].get<std::string>() << "\n";
    }
    return o.code;
  } catch (const NahmError& e) {
    err << e.what() << "\n";
    return e.code() == "ConfigParse" ? kUsage : kFail;
  }
}

}  // namespace nahm::cli
