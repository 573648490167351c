#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "configs.hpp"
#include "nahm/io.hpp"
#include "nahm/nahm_core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace nahm;

namespace {

int eps3(int a, int b, int c) { return (a - b) * (b - c) * (c - a) / 2; }

Triple eval_T(const TField& f, double t) {
  Triple T;
  CMat T0;
  f.eval(t, T, T0);
  return T;
}

double triple_diff(const Triple& a, const Triple& b) {
  double d = 0;
  for (int k = 0; k < 3; ++k) d = std::max(d, max_abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("quaternion multiplication table") {
  const auto& s = sigma();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CMat expect = (a == b ? -1.0 : 0.0) * CMat::Identity(2, 2);
      for (int c = 0; c < 3; ++c) expect += double(eps3(a, b, c)) * s[c];
      CHECK(max_abs(s[a] * s[b] - expect) < 1e-15);
    }
  CHECK(max_abs(s[0] * s[1] - s[2]) < 1e-15);
}

TEST_CASE("su(2) generators: brackets and Casimir") {
  for (int k = 1; k <= 5; ++k) {
    Triple e = su2_irrep(k);
    for (int a = 0; a < 3; ++a) {
      CHECK(max_abs(comm(e[a], e[(a + 1) % 3]) - e[(a + 2) % 3]) < 1e-14);
      CHECK(max_abs(e[a] + e[a].adjoint()) < 1e-15);
    }
    CMat cas = -(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    CHECK(max_abs(cas - (0.25 * (k * k - 1)) * CMat::Identity(k, k)) < 1e-13);
  }
}

TEST_CASE("builtin families and applicability") {
  auto ta = testcfg::cfg_a();
  auto nd = builtin_family("flat_zero", ta, random_framing(ta, 0));
  CHECK(nd.intervals.size() == 1);
  CHECK(nd.intervals[0].m == 1);
  CHECK(triple_max_abs(eval_T(*nd.intervals[0].field, 0.3)) == 0.0);
  CHECK_FALSE(nd.pole(0, Side::Left).singular());

  auto tb = testcfg::cfg_b();
  try {
    builtin_family("flat_zero", tb, random_framing(tb, 0));
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "FamilyInapplicable");
  }
  CHECK_THROWS_AS(builtin_family("pure_pole", ta, random_framing(ta, 0)), NahmError);

  auto pb = builtin_family("pure_pole", tb, coordinate_framing(tb));
  Triple rho = su2_irrep(2);
  for (double t : {-1.7, -0.2, 0.9}) {
    Triple T = eval_T(*pb.intervals[0].field, t);
    for (int a = 0; a < 3; ++a) CHECK(max_abs(T[a] + rho[a] / (t + 2.0)) < 1e-15);
  }
  CHECK(pb.pole(0, Side::Left).singular());
}

TEST_CASE("nahm residual") {
  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  CHECK(nahm_residual(fa, {-0.5, 0.0, 0.7}) == 0.0);

  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 3));
  CHECK(nahm_residual(pb, {-1.5, -0.5, 0.5}) <= 1e-10);

  // constant non-commuting matrices: residual = max |[T_b, T_c]|
  Triple T;
  T[0] = su2_irrep(2)[0];
  T[1] = 0.7 * su2_irrep(2)[1];
  T[2] = CMat::Zero(2, 2);
  NahmData cd_ = pb;
  cd_.intervals[0].field = std::make_shared<ConstField>(T, -2.0, 1.0);
  double expect = 0;
  for (int a = 0; a < 3; ++a) expect = std::max(expect, comm(T[(a + 1) % 3], T[(a + 2) % 3]).norm());
  CHECK(expect > 0.1);
  CHECK(std::abs(nahm_residual(cd_, {0.0}) - expect) < 1e-14);

  try {
    nahm_residual(pb, {1.0});
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "SampleOutOfRange");
  }
}

TEST_CASE("IVP continuation") {
  auto z = solve_nahm_ivp(0.0, triple_zero(2), -1.0, 1.0, 6);
  CHECK(triple_max_abs(eval_T(*z.field, 0.4)) == 0.0);

  // pure pole values reproduce the closed form along the grid
  Triple rho = su2_irrep(2);
  const double t0 = -0.5;
  Triple init = triple_scale(rho, -1.0 / (t0 + 2.0));
  auto iv = solve_nahm_ivp(t0, init, -2.0, 1.0, 10);
  auto sf = std::dynamic_pointer_cast<const SampledField>(iv.field);
  REQUIRE(sf);
  double err = 0;
  for (int p = 0; p + 1 < static_cast<int>(sf->breaks().size()); ++p)
    for (double t : sf->panel_nodes(p)) {
      if (t + 2.0 < 3e-3 || 1.0 - t < 3e-3) continue;
      err = std::max(err, triple_diff(eval_T(*sf, t), triple_scale(rho, -1.0 / (t + 2.0))));
    }
  CHECK(err < 1e-8);
  CHECK(nahm_residual_at(*sf, 0.3) < 1e-8);

  // commuting diagonal data stays constant
  Triple d = triple_zero(3);
  for (int a = 0; a < 3; ++a)
    for (int j = 0; j < 3; ++j) d[a](j, j) = cd(0, 0.1 * (a + 1) * (j - 1));
  auto dv = solve_nahm_ivp(0.1, d, -1.0, 1.0, 4);
  CHECK(triple_diff(eval_T(*dv.field, -0.8), d) < 1e-13);

  // a blowing-up solution is detected: the pole at t = -2 + 2.5 lies inside the interval
  Triple blow = triple_scale(rho, -1.0 / 0.5);
  try {
    IvpOptions opt;
    opt.blowup_cap = 1e4;
    solve_nahm_ivp(1.0, blow, 0.0, 3.0, 6, opt);
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "BlowupDetected");
  }
}

TEST_CASE("Lax invariants") {
  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  auto tab = lax_invariants(fa, {cd(0, 0), cd(0.3, -0.2)}, {-0.5, 0.5});
  for (const auto& z : tab.eig)
    for (const auto& s : z)
      for (cd v : s) CHECK(std::abs(v) == 0.0);

  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, coordinate_framing(tb));
  std::vector<double> samples{-1.5, -1.0, -0.5, 0.0, 0.5};
  auto t0 = lax_invariants(pb, {cd(0, 0)}, samples);
  for (const auto& s : t0.eig[0])
    for (cd v : s) CHECK(std::abs(v) < 1e-12);
  std::vector<cd> zetas{cd(0, 0), cd(0.4, 0.1), cd(-1.2, 0.7), cd(2.0, -0.3)};
  CHECK(lax_drift(lax_invariants(pb, zetas, samples)) < 1e-8);

  // 1e-3 perturbation of the data
  Triple P = triple_zero(2);
  P[0] = su2_irrep(2)[2];
  P[1] = su2_irrep(2)[0];
  NahmData pert = pb;
  pert.intervals[0].field = std::make_shared<PerturbedField>(pb.intervals[0].field, P, 1e-3);
  CHECK(lax_drift(lax_invariants(pert, zetas, samples)) > 1e-6);
}

TEST_CASE("pole structure checks") {
  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  CHECK(check_pole_structure(fa).pass());

  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 4));
  auto rep = check_pole_structure(pb);
  CHECK(rep.pass());
  bool saw = false;
  for (const auto& c : rep.checks)
    if (c.name == "pole[1+]:casimir") {
      saw = true;
      CHECK(c.details.find("0.75") != std::string::npos);
    }
  CHECK(saw);

  // the opposite bracket sign fails
  NahmData wrong = pb;
  Triple rho = triple_conj(pb.framing.vplus[0], triple_scale(su2_irrep(2), -1.0));
  wrong.intervals[0].field = std::make_shared<PoleField>(rho, -2.0, 1.0, Side::Left);
  finalize(wrong);
  auto rw = check_pole_structure(wrong);
  CHECK_FALSE(rw.pass());
  CHECK(rw.first_failure()->name == "pole[1+]:commutators");
}

TEST_CASE("jump data") {
  auto ta = testcfg::cfg_a();
  CHECK(check_jump_data(builtin_family("flat_zero", ta, random_framing(ta, 0))).report.checks.empty());

  auto tc = testcfg::cfg_c();
  auto nd = builtin_family("abelian_jump", tc, random_framing(tc, 1));
  auto jc = check_jump_data(nd);
  CHECK(jc.report.pass());
  CHECK(jc.residual[1] < 1e-12);
  CHECK(nd.xyz(1, Side::Left).Y.cols() == 2);
  CHECK(nd.xyz(0, Side::Right).Y.cols() == 2);
  CHECK(nd.xyz(1, Side::Left).Z.cols() == 2);
  CHECK(nd.xyz(0, Side::Left).X.cols() == 4);

  // zero quaternions: zero connecting map, trivial Y
  json p0 = {{"q", {nullptr, {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}}}}};
  auto z = builtin_family("abelian_jump", tc, coordinate_framing(tc), p0);
  auto jz = check_jump_data(z);
  CHECK(jz.residual[1] == 0.0);
  CHECK(z.xyz(1, Side::Left).Y.cols() == 0);
  CHECK(jz.report.pass());

  // generic perturbation of tau breaks the structured form
  NahmData pert = nd;
  std::mt19937_64 rng(9);
  Triple P;
  for (auto& x : P) x = skew_part(random_unitary(2, rng));
  pert.intervals[1].field = std::make_shared<PerturbedField>(nd.intervals[1].field, P, 0.05);
  finalize(pert);
  auto jp = check_jump_data(pert);
  CHECK(jp.residual[1] > 1e-4);
  CHECK_FALSE(jp.report.pass());
}

TEST_CASE("gauge action") {
  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 2));
  auto same = apply_gauge(identity_gauge(pb), pb);
  CHECK(triple_diff(eval_T(*same.intervals[0].field, -0.4), eval_T(*pb.intervals[0].field, -0.4)) == 0.0);

  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  GaugeTransform cg;
  cg.g.push_back(std::make_shared<ConstGauge>(CMat::Constant(1, 1, std::exp(cd(0, 0.7)))));
  auto rot = apply_gauge(cg, fa);
  CHECK(triple_max_abs(eval_T(*rot.intervals[0].field, 0.2)) == 0.0);
  CHECK(std::abs(rot.framing.vplus[0](0, 0) - std::exp(cd(0, 0.7))) < 1e-15);

  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto g = random_gauge(pb, s);
    auto gd = apply_gauge(g, pb);
    CHECK(nahm_residual(gd, {-1.5, -0.5, 0.5}) <= 1e-9);
    CHECK(check_pole_structure(gd).pass());
    CHECK(validate_framing(gd.type, gd.framing).pass());
  }

  GaugeTransform bad;
  bad.g.push_back(std::make_shared<ConstGauge>(CMat::Identity(3, 3)));
  try {
    apply_gauge(bad, pb);
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "DimensionMismatch");
  }
}

TEST_CASE("temporal gauge") {
  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  auto same = to_temporal_gauge(fa);
  CHECK(same.max_t0 == 0.0);

  // central connection T0 = i theta: the gauge is exp(i theta (t - t_c)) under d + T0
  const double theta = 0.8;
  GaugeTransform gg;
  gg.g.push_back(std::make_shared<ExpPolyGauge>(std::vector<CMat>{CMat::Zero(1, 1), CMat::Constant(1, 1, cd(0, -theta))}, 0.0));
  auto central = apply_gauge(gg, fa);
  Triple T;
  CMat T0;
  central.intervals[0].field->eval(0.3, T, T0);
  CHECK(std::abs(T0(0, 0) - cd(0, theta)) < 1e-14);
  auto tr = to_temporal_gauge(central);
  CMat g, dg;
  tr.gauge.g[0]->eval(0.5, g, dg);
  CHECK(std::abs(g(0, 0) - std::exp(cd(0, theta * 0.5))) < 1e-12);
  CHECK(tr.max_t0 <= 1e-12);

  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 2));
  auto gd = apply_gauge(random_gauge(pb, 8), pb);
  auto tg = to_temporal_gauge(gd);
  CHECK(tg.max_t0 <= 1e-12);
  CHECK(tg.data.intervals[0].field->temporal());
  CHECK(nahm_residual(tg.data, {-1.5, -0.5, 0.5}) <= 1e-7);
  CHECK(check_pole_structure(tg.data).pass());
}

TEST_CASE("rescaling") {
  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 2));
  auto id = rescale(tb, tb, pb);
  CHECK(triple_diff(eval_T(*id.intervals[0].field, 0.1), eval_T(*pb.intervals[0].field, 0.1)) == 0.0);

  auto ta = testcfg::cfg_a();
  auto fa = builtin_family("flat_zero", ta, random_framing(ta, 0));
  SymmetryBreakingType ta2{{-2.0, 2.0}, {1, 1}, {{1}, {-1}}};
  auto fa2 = rescale(ta, ta2, fa);
  CHECK(triple_max_abs(eval_T(*fa2.intervals[0].field, 1.5)) == 0.0);

  SymmetryBreakingType tb2{{-1.0, 0.5}, {1, 2}, {{2}, {-1, -1}}};
  auto pb2 = rescale(tb, tb2, pb);
  Triple rho = triple_conj(pb.framing.vplus[0], su2_irrep(2));
  double err = 0;
  for (double t : {-0.9, -0.5, 0.0, 0.4}) {
    const double f = -2.0 + (t + 1.0) * 2.0;
    err = std::max(err, triple_diff(eval_T(*pb2.intervals[0].field, t), triple_scale(rho, -2.0 / (f + 2.0))));
  }
  CHECK(err < 1e-12);
  CHECK(nahm_residual(pb2, {-0.75, -0.25, 0.25}) <= 1e-10);

  auto back = rescale(tb2, tb, pb2);
  double rt = 0;
  for (double t : {-1.9, -1.0, 0.0, 0.95}) rt = std::max(rt, triple_diff(eval_T(*back.intervals[0].field, t), eval_T(*pb.intervals[0].field, t)));
  CHECK(rt < 1e-10);

  SymmetryBreakingType other{{-1.0, 0.5}, {1, 2}, {{1}, {-1, 0}}};
  try {
    rescale(tb, other, pb);
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "ChernMismatch");
  }
}

TEST_CASE("NahmData json round trip") {
  auto tc = testcfg::cfg_c();
  auto nd = builtin_family("abelian_jump", tc, random_framing(tc, 1));
  auto j = nahm_to_json(nd);
  CHECK(j["version"] == "nahm-data/1");
  auto back = nahm_from_json(json::parse(j.dump()));
  CHECK(nahm_to_json(back).dump() == j.dump());
  for (int i = 0; i < 2; ++i)
    CHECK(triple_diff(eval_T(*back.intervals[i].field, -0.5 + i), eval_T(*nd.intervals[i].field, -0.5 + i)) == 0.0);

  auto tb = testcfg::cfg_b();
  auto gd = apply_gauge(random_gauge(builtin_family("pure_pole", tb, random_framing(tb, 2)), 3),
                        builtin_family("pure_pole", tb, random_framing(tb, 2)));
  auto gb = nahm_from_json(json::parse(nahm_to_json(gd).dump()));
  CHECK(triple_diff(eval_T(*gb.intervals[0].field, -0.7), eval_T(*gd.intervals[0].field, -0.7)) == 0.0);

  // a family tag alone rebuilds the data
  json tag = {{"version", "nahm-data/1"}, {"type", type_to_json(tb)}, {"family", "pure_pole"}};
  auto fb = nahm_from_json(tag);
  CHECK(nahm_residual(fb, {0.0}) < 1e-12);

  json bad = {{"version", "nahm-data/0"}};
  try {
    nahm_from_json(bad);
    CHECK(false);
  } catch (const NahmError& e) {
    CHECK(e.code() == "ConfigParse");
  }
}

TEST_CASE("sampled representation") {
  auto tb = testcfg::cfg_b();
  auto pb = builtin_family("pure_pole", tb, random_framing(tb, 2));
  auto gd = apply_gauge(random_gauge(pb, 5), pb);
  auto tg = to_temporal_gauge(gd).data;
  // resampling a temporal field keeps values and the pole term
  auto sf = SampledField::resample(*tg.intervals[0].field, 8, 16, 1e-3);
  for (double t : {-1.99, -1.2, 0.3, 0.99})
    CHECK(triple_diff(eval_T(*sf, t), eval_T(*tg.intervals[0].field, t)) < 1e-9);
}
