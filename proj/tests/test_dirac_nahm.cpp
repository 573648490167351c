#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "configs.hpp"
#include "nahm/dirac_nahm.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>

using namespace nahm;

namespace {

// Spin-j matrices in the standard |j, m> basis.
std::array<CMat, 3> spin_matrices(int k) {
  const double j = 0.5 * (k - 1);
  CMat jp = CMat::Zero(k, k), jz = CMat::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    const double m = j - a;
    jz(a, a) = m;
    if (a > 0) jp(a - 1, a) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  CMat jm = jp.adjoint();
  return {CMat(0.5 * (jp + jm)), CMat(-0.5 * I1 * (jp - jm)), jz};
}

// Exponents from the coupling of spin (k-1)/2 with spin 1/2: J(J+1) - j(j+1) - 3/4.
std::vector<double> exponent_oracle(int k) {
  const double j = 0.5 * (k - 1);
  std::vector<double> out;
  for (double J : {j + 0.5, j - 0.5}) {
    if (J < 0) continue;
    for (int c = 0; c < static_cast<int>(2 * J + 1.5); ++c) out.push_back(J * (J + 1) - j * (j + 1) - 0.75);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CMat pauli_dot(const Vec3& x) {
  CMat p = CMat::Zero(2, 2);
  for (int a = 0; a < 3; ++a) p += x[a] * pauli()[a];
  return p;
}

double sup_diff(const SpinorFunction& a, const SpinorFunction& b) {
  double d = 0;
  for (size_t i = 0; i < a.v.size(); ++i) d = std::max(d, (a.v[i] - b.v[i]).cwiseAbs().maxCoeff());
  return d;
}

// Orthogonal projection residual of f onto the span of the fiber basis.
double outside_span(const Fiber& F, const SpinorFunction& f) {
  const FiberGrid& g = *F.grid;
  SpinorFunction r = f;
  for (const auto& b : F.basis) {
    cd c = h0_inner(g, b, f);
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] -= c * b.v[i];
  }
  return std::sqrt(std::abs(h0_inner(g, r, r)) / std::abs(h0_inner(g, f, f)));
}

std::vector<double> higgs_spectrum(const Fiber& F) {
  const int N = F.dimension();
  CMat M(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) M(a, b) = h0_inner_weighted(*F.grid, F.basis[a], F.basis[b], true);
  Eigen::SelfAdjointEigenSolver<CMat> es(herm_part(M));
  return {es.eigenvalues().data(), es.eigenvalues().data() + N};
}

}  // namespace

TEST_CASE("local exponents follow the spin coupling rule") {
  for (int k = 1; k <= 4; ++k) {
    ExponentTable E = local_exponents(su2_irrep(k));
    auto want = exponent_oracle(k);
    REQUIRE(E.nu.size() == want.size());
    for (size_t j = 0; j < want.size(); ++j) CHECK(E.nu[j] == doctest::Approx(want[j]).epsilon(1e-12));
    CHECK(E.admissible_count == k + 1);
    // brute force from the standard spin basis with rho = -i J
    auto J = spin_matrices(k);
    CMat B = CMat::Zero(2 * k, 2 * k);
    for (int a = 0; a < 3; ++a) B -= kron(CMat(-I1 * J[a]), sigma()[a]);
    Eigen::SelfAdjointEigenSolver<CMat> es(herm_part(B));
    for (size_t j = 0; j < want.size(); ++j) CHECK(std::abs(es.eigenvalues()(j) - want[j]) < 1e-12);
  }
  auto e2 = local_exponents(su2_irrep(2));
  CHECK(e2.nu == std::vector<double>{-1.5, 0.5, 0.5, 0.5});
  auto e3 = local_exponents(su2_irrep(3));
  CHECK(e3.nu == std::vector<double>{-2.0, -2.0, 1.0, 1.0, 1.0, 1.0});
  auto e1 = local_exponents(su2_irrep(1));
  CHECK(e1.nu == std::vector<double>{0.0, 0.0});
}

TEST_CASE("grid quadrature integrates polynomials and collar powers") {
  auto tb = testcfg::cfg_b();
  auto nd = builtin_family("pure_pole", tb, coordinate_framing(tb));
  auto g = make_grid(nd);
  const auto& G = g.iv[0];
  CHECK(G.sing[0]);
  CHECK_FALSE(G.sing[1]);
  CHECK(G.t[G.mid_index] == G.mid);
  CHECK(G.t.back() == G.hi);
  CHECK(std::is_sorted(G.t.begin(), G.t.end()));
  double s1 = 0, s2 = 0;
  for (int j = 0; j < G.nodes(); ++j) {
    s1 += G.w[j] * G.t[j] * G.t[j];
    s2 += G.w[j] * std::sqrt(G.t[j] - G.lo);
  }
  const double eps = g.opt.init_rel * (G.hi - G.lo);
  auto cube = [](double v) { return v * v * v; };
  CHECK(std::abs(s1 - (cube(G.hi) - cube(G.lo + eps)) / 3.0) < 1e-12);
  CHECK(std::abs(s2 - 2.0 / 3.0 * (std::pow(G.hi - G.lo, 1.5) - std::pow(eps, 1.5))) < 1e-12);
}

TEST_CASE("flat data: the fiber is spanned by exp(-t x.pauli) q") {
  auto ta = testcfg::cfg_a();
  auto nd = builtin_family("flat_zero", ta, random_framing(ta, 0));
  for (Vec3 x : {Vec3{0, 0, 0}, Vec3{0.3, -0.4, 0.5}, Vec3{0, 0, 2.0}}) {
    Fiber F = compute_fiber(nd, x);
    REQUIRE(F.dimension() == 2);
    CHECK(F.gram_residual < 1e-12);
    CHECK(F.gap > 1e3);
    const auto& G = F.grid->iv[0];
    for (int q = 0; q < 2; ++q) {
      SpinorFunction f = zero_spinor(*F.grid);
      for (int j = 0; j < G.nodes(); ++j) {
        CMat E = (-G.t[j] * pauli_dot(x)).exp();
        f.v[0].col(j) = E.col(q);
      }
      CHECK(outside_span(F, f) < 1e-10);
    }
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double mean = r == 0 ? 0.0 : 1.0 / std::tanh(2 * r) - 0.5 / r;
    auto ev = higgs_spectrum(F);
    CHECK(std::abs(ev[0] + mean) < 1e-10);
    CHECK(std::abs(ev[1] - mean) < 1e-10);
  }
}

TEST_CASE("fiber dimensions of the reference types") {
  auto ta = testcfg::cfg_a();
  auto fa = compute_fiber(builtin_family("flat_zero", ta, random_framing(ta, 0)), {0.2, 0.1, -0.3});
  CHECK(fa.dimension() == 2);
  CHECK(fa.dim_u == std::vector<int>{2, 2});

  auto tb = testcfg::cfg_b();
  auto fb = compute_fiber(builtin_family("pure_pole", tb, random_framing(tb, 2)), {0.2, 0.1, -0.3});
  CHECK(fb.dimension() == 3);
  CHECK(fb.dim_u == std::vector<int>{3, 4});
  CHECK(fb.gram_residual < 1e-12);

  auto tc = testcfg::cfg_c();
  auto fc = compute_fiber(builtin_family("abelian_jump", tc, coordinate_framing(tc)), {0.2, 0.1, -0.3});
  CHECK(fc.dimension() == 6);
  CHECK(fc.dim_u == std::vector<int>{4, 6, 4});
}

TEST_CASE("fiber elements solve the adjoint equation and the cokernel matching") {
  auto tb = testcfg::cfg_b();
  auto tc = testcfg::cfg_c();
  std::vector<NahmData> cases{builtin_family("pure_pole", tb, random_framing(tb, 5)),
                              builtin_family("abelian_jump", tc, random_framing(tc, 1))};
  for (const auto& nd : cases) {
    Fiber F = compute_fiber(nd, {0.4, -0.2, 0.7});
    for (const auto& b : F.basis) {
      SpinorFunction d = apply_dirac(nd, *F.grid, F.x, b, true);
      double worst = 0;
      for (size_t i = 0; i < d.v.size(); ++i) {
        const auto& G = F.grid->iv[i];
        // skip the Frobenius start nodes, where psi ~ eps^nu is resolved by the analytic tail
        for (int j = 0; j < G.nodes(); ++j) {
          const double dist = std::min(G.t[j] - G.lo, G.hi - G.t[j]);
          if ((G.sing[0] || G.sing[1]) && dist < 1e-4) continue;
          worst = std::max(worst, d.v[i].col(j).norm());
        }
      }
      CHECK(worst < 1e-8);
      auto rep = check_boundary_conditions(nd, *F.grid, b, BcMode::Cokernel, 1e-9);
      CHECK(rep.pass());
    }
  }
}

TEST_CASE("boundary checks name the violated condition") {
  auto tc = testcfg::cfg_c();
  auto nd = builtin_family("abelian_jump", tc, coordinate_framing(tc));
  auto g = make_grid(nd);
  SpinorFunction f = zero_spinor(g);
  // smooth bump vanishing at every end passes
  for (size_t i = 0; i < f.v.size(); ++i)
    for (int j = 0; j < g.iv[i].nodes(); ++j) {
      const double t = g.iv[i].t[j];
      f.v[i].col(j).setConstant((t - g.iv[i].lo) * (g.iv[i].hi - t));
    }
  CHECK(check_boundary_conditions(nd, g, f, BcMode::H1).pass());
  // a Y+ component at the internal level breaks the left-end condition there
  const CMat& Y = nd.xyz(1, Side::Left).Y;
  REQUIRE(Y.cols() > 0);
  f.v[1].col(0) += Y.col(0);
  auto rep = check_boundary_conditions(nd, g, f, BcMode::H1);
  REQUIRE_FALSE(rep.pass());
  CHECK(rep.first_failure()->name == "bc[2+]:X+Y");
  // a nonzero value at the outer end
  SpinorFunction h = zero_spinor(g);
  h.v[0].col(0).setOnes();
  auto rep2 = check_boundary_conditions(nd, g, h, BcMode::H1);
  CHECK(rep2.first_failure()->name == "bc[1+]:X+Y");
}

TEST_CASE("inner products and derivatives on the grid") {
  auto ta = testcfg::cfg_a();
  auto nd = builtin_family("flat_zero", ta, random_framing(ta, 0));
  auto g = make_grid(nd);
  const auto& G = g.iv[0];
  SpinorFunction a = zero_spinor(g), b = zero_spinor(g);
  for (int j = 0; j < G.nodes(); ++j) {
    const double t = G.t[j];
    a.v[0].col(j) << cd(t, 0), cd(0, 1);
    b.v[0].col(j) << cd(t * t, 0), cd(1, t);
  }
  // <a,b> = int t^3 + (-i)(1 + i t) dt over [-1,1] = -2i
  cd ip = h0_inner(g, a, b);
  CHECK(std::abs(ip - cd(0, -2)) < 1e-13);
  // <a, t b> = int t^4 + t^2 - i t dt = 2/5 + 2/3
  cd ipt = h0_inner_weighted(g, a, b, true);
  CHECK(std::abs(ipt - cd(0.4 + 2.0 / 3.0, 0)) < 1e-13);
  SpinorFunction d = derivative(g, b);
  double worst = 0;
  for (int j = 0; j < G.nodes(); ++j) {
    CVec want(2);
    want << cd(2 * G.t[j], 0), cd(0, 1);
    worst = std::max(worst, (d.v[0].col(j) - want).norm());
  }
  CHECK(worst < 1e-10);
  CHECK(std::abs(h1_norm(g, a) - std::sqrt(2.0 / 3.0 + 2.0 + 2.0)) < 1e-12);
  // sigma action squares to -1
  SpinorFunction s = apply_sigma(apply_sigma(b, 1), 1);
  for (auto& v : s.v) v = -v;
  CHECK(sup_diff(s, b) < 1e-15);
}

TEST_CASE("Higgs spectrum is gauge invariant") {
  auto tb = testcfg::cfg_b();
  auto nd = builtin_family("pure_pole", tb, random_framing(tb, 9));
  auto gauged = apply_gauge(random_gauge(nd, 4, 0.3), nd);
  const Vec3 x{0.5, 0.1, -0.6};
  auto e0 = higgs_spectrum(compute_fiber(nd, x));
  auto e1 = higgs_spectrum(compute_fiber(gauged, x));
  REQUIRE(e0.size() == 3);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(e0[a] - e1[a]) < 1e-9);
  // the eigenvalues lie inside the interval
  CHECK(e0.front() > tb.lambda[0]);
  CHECK(e0.back() < tb.lambda[1]);
}

TEST_CASE("large separation stays well conditioned for a single interval") {
  auto ta = testcfg::cfg_a();
  auto nd = builtin_family("flat_zero", ta, random_framing(ta, 0));
  const double r = 12.0;
  auto ev = higgs_spectrum(compute_fiber(nd, {0, r, 0}));
  const double mean = 1.0 / std::tanh(2 * r) - 0.5 / r;
  CHECK(std::abs(ev[1] - mean) < 1e-10);
  CHECK(std::abs(ev[0] + mean) < 1e-10);
}
