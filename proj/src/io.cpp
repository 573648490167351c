#include "nahm/io.hpp"

#include <charconv>

namespace nahm {

json cmat_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(r);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

CMat cmat_from_json(const json& j) {
  const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  CMat m(r, c);
  const auto& d = j.at("data");
  if (static_cast<Eigen::Index>(d.size()) != r) throw NahmError("ConfigParse", "matrix row count mismatch");
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(d[i].size()) != c) throw NahmError("ConfigParse", "matrix column count mismatch");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = cd(d[i][k].at(0).get<double>(), d[i][k].at(1).get<double>());
  }
  return m;
}

json cvec_to_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

CVec cvec_from_json(const json& j) {
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = cd(j[i].at(0).get<double>(), j[i].at(1).get<double>());
  return v;
}

json triple_to_json(const Triple& t) { return json::array({cmat_to_json(t[0]), cmat_to_json(t[1]), cmat_to_json(t[2])}); }

Triple triple_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw NahmError("ConfigParse", "expected three matrices");
  return {cmat_from_json(j[0]), cmat_from_json(j[1]), cmat_from_json(j[2])};
}

json type_to_json(const SymmetryBreakingType& t) {
  return {{"lambda", t.lambda}, {"ranks", t.ranks}, {"chern", t.chern}};
}

SymmetryBreakingType type_from_json(const json& j) {
  SymmetryBreakingType t;
  try {
    t.lambda = j.at("lambda").get<std::vector<double>>();
    t.ranks = j.at("ranks").get<std::vector<int>>();
    t.chern = j.at("chern").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw NahmError("ConfigParse", std::string("type: ") + e.what());
  }
  return t;
}

json framing_to_json(const Framing& f) {
  json vp = json::array(), vm = json::array(), cm = json::array();
  for (const auto& v : f.vplus) vp.push_back(cmat_to_json(v));
  for (const auto& v : f.vminus) vm.push_back(cmat_to_json(v));
  for (const auto& c : f.cmap) cm.push_back(cmat_to_json(c));
  return {{"vplus", vp}, {"vminus", vm}, {"cmap", cm}};
}

Framing framing_from_json(const json& j) {
  Framing f;
  for (const auto& v : j.at("vplus")) f.vplus.push_back(cmat_from_json(v));
  for (const auto& v : j.at("vminus")) f.vminus.push_back(cmat_from_json(v));
  for (const auto& c : j.at("cmap")) f.cmap.push_back(cmat_from_json(c));
  return f;
}

namespace {

GaugePtr gauge_from_json(const json& j) {
  const std::string k = j.at("kind");
  if (k == "const") return std::make_shared<ConstGauge>(cmat_from_json(j.at("g")));
  if (k == "exp_poly") {
    std::vector<CMat> K;
    for (const auto& x : j.at("K")) K.push_back(cmat_from_json(x));
    return std::make_shared<ExpPolyGauge>(K, j.at("tc").get<double>());
  }
  if (k == "sampled") {
    auto load = [](const json& a) {
      std::vector<std::vector<CMat>> v;
      for (const auto& row : a) {
        std::vector<CMat> r;
        for (const auto& x : row) r.push_back(cmat_from_json(x));
        v.push_back(r);
      }
      return v;
    };
    return std::make_shared<SampledGauge>(j.at("breaks").get<std::vector<double>>(), j.at("degree").get<int>(),
                                          load(j.at("g")), load(j.at("dg")));
  }
  throw NahmError("ConfigParse", "unknown gauge kind '" + k + "'");
}

FieldPtr field_from_json(const json& j) {
  const std::string k = j.at("kind");
  if (k == "zero") return std::make_shared<ZeroField>(j.at("m").get<int>(), j.at("lo").get<double>(), j.at("hi").get<double>());
  if (k == "const") return std::make_shared<ConstField>(triple_from_json(j.at("T")), j.at("lo").get<double>(), j.at("hi").get<double>());
  if (k == "pole")
    return std::make_shared<PoleField>(triple_from_json(j.at("rho")), j.at("lo").get<double>(), j.at("hi").get<double>(),
                                       j.at("side") == "left" ? Side::Left : Side::Right);
  if (k == "sampled") return SampledField::from_json(j);
  if (k == "perturbed")
    return std::make_shared<PerturbedField>(field_from_json(j.at("base")), triple_from_json(j.at("P")), j.at("delta").get<double>());
  if (k == "gauged") return std::make_shared<GaugedField>(field_from_json(j.at("base")), gauge_from_json(j.at("gauge")));
  if (k == "rescaled")
    return std::make_shared<RescaledField>(field_from_json(j.at("base")), j.at("lo").get<double>(), j.at("hi").get<double>());
  throw NahmError("ConfigParse", "unknown field kind '" + k + "'");
}

}  // namespace

json nahm_to_json(const NahmData& nd) {
  json iv = json::array();
  for (const auto& i : nd.intervals) iv.push_back(i.field->describe());
  json jumps = json::array();
  for (const auto& J : nd.jumps) {
    json xs = json::array(), qs = json::array();
    for (const auto& x : J.x) xs.push_back(cvec_to_json(x));
    for (const auto& q : J.q) qs.push_back(cvec_to_json(q));
    jumps.push_back({{"level", J.level}, {"x", xs}, {"q", qs}});
  }
  return {{"version", kNahmDataVersion},
          {"type", type_to_json(nd.type)},
          {"framing", framing_to_json(nd.framing)},
          {"family", nd.family},
          {"params", nd.params},
          {"intervals", iv},
          {"jumps", jumps}};
}

NahmData nahm_from_json(const json& j) {
  try {
    if (j.value("version", std::string()) != kNahmDataVersion)
      throw NahmError("ConfigParse", std::string("expected version ") + kNahmDataVersion);
    SymmetryBreakingType t = type_from_json(j.at("type"));
    DerivedInvariants inv = validate_type(t);
    Framing f = j.contains("framing") ? framing_from_json(j.at("framing"))
                                      : random_framing(t, j.value("framing_seed", 0ULL));
    const std::string family = j.value("family", std::string());
    const json params = j.value("params", json::object());
    if (!j.contains("intervals")) {
      if (family.empty()) throw NahmError("ConfigParse", "document has neither intervals nor a family tag");
      return builtin_family(family, t, f, params);
    }
    require_framing(t, f);
    NahmData nd;
    nd.type = t;
    nd.inv = inv;
    nd.framing = f;
    nd.family = family;
    nd.params = params;
    const auto& ivs = j.at("intervals");
    if (static_cast<int>(ivs.size()) != inv.intervals()) throw NahmError("DimensionMismatch", "interval count");
    for (int i = 0; i < inv.intervals(); ++i)
      nd.intervals.push_back({i, t.lambda[i], t.lambda[i + 1], inv.dim(i), field_from_json(ivs[i])});
    nd.jumps.resize(inv.n);
    for (int a = 0; a < inv.n; ++a) nd.jumps[a].level = a;
    if (j.contains("jumps"))
      for (const auto& J : j.at("jumps")) {
        const int a = J.at("level").get<int>();
        if (a < 0 || a >= inv.n) throw NahmError("ConfigParse", "jump level out of range");
        for (const auto& x : J.at("x")) nd.jumps[a].x.push_back(cvec_from_json(x));
        for (const auto& q : J.at("q")) nd.jumps[a].q.push_back(cvec_from_json(q));
      }
    finalize(nd);
    return nd;
  } catch (const json::exception& e) {
    throw NahmError("ConfigParse", e.what());
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"details", c.details}});
  return {{"pass", r.pass()}, {"checks", checks}};
}

}  // namespace nahm
