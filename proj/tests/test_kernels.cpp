#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nahm/kernels.hpp"

#include <random>
#include <vector>

using namespace nahm::kernels;

namespace {

struct Case {
  std::vector<double> w;
  std::vector<cd> a, b;
};

Case make_case(std::size_t nodes, std::size_t comps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Case c;
  for (std::size_t j = 0; j < nodes; ++j) c.w.push_back(std::abs(nd(rng)));
  for (std::size_t k = 0; k < nodes * comps; ++k) {
    c.a.emplace_back(nd(rng), nd(rng));
    c.b.emplace_back(nd(rng), nd(rng));
  }
  return c;
}

// long double reference
std::complex<long double> reference(const Case& c, std::size_t nodes, std::size_t comps) {
  std::complex<long double> s = 0;
  for (std::size_t j = 0; j < nodes; ++j)
    for (std::size_t k = 0; k < comps; ++k) {
      std::complex<long double> a(c.a[j * comps + k].real(), c.a[j * comps + k].imag());
      std::complex<long double> b(c.b[j * comps + k].real(), c.b[j * comps + k].imag());
      s += static_cast<long double>(c.w[j]) * std::conj(a) * b;
    }
  return s;
}

}  // namespace

TEST_CASE("weighted dot: scalar kernel against long double reference") {
  for (std::size_t comps : {2u, 4u, 6u, 12u})
    for (std::size_t nodes : {0u, 1u, 7u, 130u}) {
      auto c = make_case(nodes, comps, nodes * 31 + comps);
      auto ref = reference(c, nodes, comps);
      cd got = wdot_scalar(c.w.data(), c.a.data(), c.b.data(), nodes, comps);
      CHECK(std::abs(std::complex<long double>(got.real(), got.imag()) - ref) <= 1e-12L * (1 + std::abs(ref)));
    }
}

TEST_CASE("weighted dot: AVX2 and scalar agree") {
  if (!avx2_available()) {
    MESSAGE("AVX2 not available; equivalence test skipped");
    return;
  }
  for (std::size_t comps : {2u, 4u, 6u, 8u, 12u})
    for (std::size_t nodes : {1u, 3u, 64u, 1001u}) {
      auto c = make_case(nodes, comps, nodes + 7 * comps);
      cd s = wdot_scalar(c.w.data(), c.a.data(), c.b.data(), nodes, comps);
      cd v = wdot_avx2(c.w.data(), c.a.data(), c.b.data(), nodes, comps);
      CHECK(std::abs(s - v) <= 1e-13 * (1 + std::abs(s)));
    }
}

TEST_CASE("weighted dot: hermitian symmetry and dispatch") {
  auto c = make_case(50, 4, 3);
  cd ab = wdot(c.w.data(), c.a.data(), c.b.data(), 50, 4);
  cd ba = wdot(c.w.data(), c.b.data(), c.a.data(), 50, 4);
  CHECK(std::abs(ab - std::conj(ba)) < 1e-12);
  cd aa = wdot(c.w.data(), c.a.data(), c.a.data(), 50, 4);
  CHECK(aa.real() > 0);
  CHECK(std::abs(aa.imag()) < 1e-12);

  set_force_scalar(true);
  cd forced = wdot(c.w.data(), c.a.data(), c.b.data(), 50, 4);
  set_force_scalar(false);
  CHECK(forced == wdot_scalar(c.w.data(), c.a.data(), c.b.data(), 50, 4));
}
