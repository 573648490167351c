#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "configs.hpp"
#include "nahm/asymptotics.hpp"

#include <cmath>
#include <random>

using namespace nahm;

namespace {

NahmData data_a() {
  auto t = testcfg::cfg_a();
  return builtin_family("flat_zero", t, random_framing(t, 0));
}
NahmData data_b() {
  auto t = testcfg::cfg_b();
  return builtin_family("pure_pole", t, random_framing(t, 2));
}

double h_oracle(double r) { return 1.0 / std::tanh(2 * r) - 1.0 / (2 * r); }
double dh_oracle(double r) { return -2.0 / std::pow(std::sinh(2 * r), 2) + 1.0 / (2 * r * r); }

template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const NahmError& e) {
    return e.code();
  }
  return {};
}

const CheckRecord& find(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing check " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("ray profile of the charge-one data follows the closed form") {
  NahmData nd = data_a();
  const std::vector<double> radii{1, 2, 4, 8};
  RayProfile p = ray_profile(nd, {0, 0, 1}, radii);
  REQUIRE(p.spectra.size() == radii.size());
  for (size_t j = 0; j < radii.size(); ++j) {
    CHECK(p.spectra[j][0] == doctest::Approx(-h_oracle(radii[j])).epsilon(1e-8));
    CHECK(p.spectra[j][1] == doctest::Approx(h_oracle(radii[j])).epsilon(1e-8));
  }
  RayProfile q = ray_profile(nd, {-0.6, 0.3, 0.2}, radii, {}, 2);
  double d = 0;
  for (size_t j = 0; j < radii.size(); ++j)
    for (size_t b = 0; b < 2; ++b) d = std::max(d, std::abs(p.spectra[j][b] - q.spectra[j][b]));
  CHECK(d < 1e-8);
}

TEST_CASE("two-branch synthetic profile") {
  RayProfile p;
  p.radii = {4, 8, 16};
  p.spectra = {{-1 + 1 / 8.0, 1 - 1 / 8.0}, {-1 + 1 / 16.0, 1 - 1 / 16.0}, {-1 + 1 / 32.0, 1 - 1 / 32.0}};
  BreakingFit f = fit_mu_kappa(p);
  REQUIRE(f.branches.size() == 2);
  CHECK(f.branches[0].lambda == doctest::Approx(-1).epsilon(1e-13));
  CHECK(f.branches[0].k == doctest::Approx(1).epsilon(1e-12));
  CHECK(f.branches[1].k == doctest::Approx(-1).epsilon(1e-12));
}

TEST_CASE("exact synthetic profiles are recovered") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<double> lam{-2, 1, 1}, k{2, -1, -1};
  std::vector<double> c{u(rng), u(rng), u(rng)};
  RayProfile p;
  p.radii = {3, 5, 9, 20};
  for (double r : p.radii) {
    std::vector<double> row;
    for (int b = 0; b < 3; ++b) row.push_back(lam[b] + k[b] / (2 * r) + c[b] / (r * r));
    p.spectra.push_back(row);
  }
  BreakingFit f = fit_mu_kappa(p);
  for (int b = 0; b < 3; ++b) {
    CHECK(f.branches[b].lambda == doctest::Approx(lam[b]).epsilon(1e-12));
    CHECK(f.branches[b].k == doctest::Approx(k[b]).epsilon(1e-10));
    CHECK(f.branches[b].c == doctest::Approx(c[b]).epsilon(1e-9));
    CHECK(f.branches[b].residual < 1e-13);
  }
  REQUIRE(f.lambda.size() == 2);
  CHECK(f.multiplicity == std::vector<int>{1, 2});
  CHECK(std::abs(f.trace) < 1e-12);
  CHECK(compare_fit(f, testcfg::cfg_b()).pass());
}

TEST_CASE("ill-conditioned fits are rejected") {
  RayProfile p;
  p.radii = {4, 8};
  p.spectra = {{-1, 1}, {-1, 1}};
  CHECK(error_code([&] { fit_mu_kappa(p); }) == "FitIllConditioned");
  p.radii = {4, 6, 8};
  p.spectra.push_back({-1, 1});
  CHECK(error_code([&] { fit_mu_kappa(p); }) == "FitIllConditioned");
  p.radii = {0, 6, 8};
  CHECK(error_code([&] { fit_mu_kappa(p); }) == "FitIllConditioned");
}

TEST_CASE("fits reproduce the configured types") {
  SUBCASE("charge one") {
    BreakingFit f = fit_mu_kappa(ray_profile(data_a(), {0.3, 0.5, 0.8}, {4, 8, 16}));
    REQUIRE(f.lambda.size() == 2);
    CHECK(std::abs(f.lambda[0] + 1) < 1e-3);
    CHECK(std::abs(f.lambda[1] - 1) < 1e-3);
    CHECK(std::abs(f.k[0][0] - 1) < 0.05);
    CHECK(std::abs(f.k[1][0] + 1) < 0.05);
    CHECK(compare_fit(f, testcfg::cfg_a()).pass());
  }
  SUBCASE("pure pole") {
    BreakingFit f = fit_mu_kappa(ray_profile(data_b(), {-0.2, 0.7, 0.4}, {4, 8, 16}));
    REQUIRE(f.lambda.size() == 2);
    CHECK(f.multiplicity == std::vector<int>{1, 2});
    CHECK(std::lround(f.k[0][0]) == 2);
    CHECK(std::lround(f.k[1][0]) == -1);
    CHECK(std::lround(f.k[1][1]) == -1);
    CHECK(compare_fit(f, testcfg::cfg_b()).pass());
  }
  SUBCASE("mislabeled Chern data is detected") {
    BreakingFit f = fit_mu_kappa(ray_profile(data_a(), {0, 0, 1}, {4, 8, 16}));
    SymmetryBreakingType wrong{{-1.0, 1.0}, {1, 1}, {{3}, {-3}}};
    VerificationReport r = compare_fit(f, wrong);
    CHECK_FALSE(r.pass());
    CHECK_FALSE(find(r, "fit:chern").pass);
  }
}

TEST_CASE("energy forms agree") {
  auto e = energy(testcfg::cfg_a());
  CHECK(e.mass_form == 2);
  CHECK(e.charge_form == 2);
  CHECK(energy(testcfg::cfg_b()).mass_form == 6);
  CHECK(energy(testcfg::cfg_c()).mass_form == 4);
  for (const auto& t : {testcfg::cfg_a(), testcfg::cfg_b(), testcfg::cfg_c()}) {
    auto v = energy(t);
    CHECK(v.mass_form == doctest::Approx(v.charge_form).epsilon(1e-14));
  }
}

TEST_CASE("radial energy quadrature matches the flux identity") {
  // For spherically symmetric BPS data the energy inside radius R is 4 R^2 h(R) h'(R).
  for (double R : {2.0, 20.0}) {
    RadialEnergy e = radial_energy(data_a(), {0, 0, 1}, R);
    const double want = 4 * R * R * h_oracle(R) * dh_oracle(R);
    CHECK(e.value == doctest::Approx(want).epsilon(1e-5));
  }
  RadialEnergy e = radial_energy(data_a(), {0.6, 0, 0.8}, 20.0);
  CHECK(std::abs(e.value - 2) < 0.05 * 2);
}

TEST_CASE("quaternionic structure on the charge-one data") {
  NahmData nd = data_a();
  VerificationReport r = check_sp_symmetry(nd);
  for (const auto& c : r.checks) CHECK_MESSAGE(c.pass, c.name << " " << c.measured);
  CHECK(find(r, "sp:J^2_on_fiber").measured < 1e-10);
  CHECK(find(r, "sp:commutes_with_phi").measured < 1e-8);

  auto g = std::make_shared<const FiberGrid>(make_grid(nd));
  StructureMap J = make_structure(nd, *g, StructureKind::Quaternionic);
  Fiber f = compute_fiber(nd, {0.2, -0.4, 0.9}, g);
  StructureOnFiber s = structure_on_fiber(J, f, higgs(f));
  CMat sq = s.M * s.M.conjugate();
  CHECK(max_abs(CMat(sq + CMat::Identity(2, 2))) < 1e-10);
  // The literal anticommutator does not vanish: Phi is invertible here.
  CHECK(s.anticommutator > 0.1);
}

TEST_CASE("real structure on the charge-one data") {
  NahmData nd = data_a();
  VerificationReport r = check_so_symmetry(nd);
  CHECK(find(r, "so:data_symmetry").pass);
  CHECK(find(r, "so:C^2_on_spinors").pass);
  CHECK(find(r, "so:spectrum_symmetry").pass);
  // An SU(2) fiber carries no real structure commuting with the Dirac family at generic points.
  CHECK(find(r, "so:fiber_invariance").measured > 0.1);
  SymmetryOptions axis;
  axis.points = {{0, 0.5, 0}, {0, -1.3, 0}};
  CHECK(check_so_symmetry(nd, axis).pass());
}

TEST_CASE("symmetry checks reject unsuitable types") {
  CHECK(error_code([] { check_so_symmetry(data_b()); }) == "TypeNotSymmetric");
  CHECK(error_code([] { check_sp_symmetry(data_b()); }) == "TypeNotSymmetric");
  NahmData odd;
  odd.type = {{-1.0, 0.0, 1.0}, {1, 1, 1}, {{1}, {0}, {-1}}};
  odd.inv = validate_type(odd.type);
  REQUIRE(odd.inv.N % 2 == 1);
  CHECK(error_code([&] { check_sp_symmetry(odd); }) == "OddRank");
}

TEST_CASE("asymmetric perturbations break the real structure linearly") {
  SymmetryOptions axis;
  axis.points = {{0, 0.5, 0}};
  std::vector<double> defect;
  for (double delta : {1e-3, 2e-3, 4e-3}) {
    NahmData nd = data_a();
    Triple P{CMat::Constant(1, 1, cd(0, 0.7)), CMat::Constant(1, 1, cd(0, -0.4)), CMat::Constant(1, 1, cd(0, 0.5))};
    nd.intervals[0].field = std::make_shared<PerturbedField>(nd.intervals[0].field, P, delta);
    VerificationReport r = check_so_symmetry(nd, axis);
    CHECK_FALSE(find(r, "so:data_symmetry").pass);
    defect.push_back(find(r, "so:fiber_invariance").measured);
  }
  CHECK(defect[1] / defect[0] == doctest::Approx(2).epsilon(0.1));
  CHECK(defect[2] / defect[1] == doctest::Approx(2).epsilon(0.1));
}
