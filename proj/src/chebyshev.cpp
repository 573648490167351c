#include "nahm/chebyshev.hpp"

#include <cmath>
#include <numbers>

namespace nahm {

RVec lobatto_nodes(int n) {
  RVec s(n + 1);
  for (int j = 0; j <= n; ++j) s(j) = -std::cos(std::numbers::pi * j / n);
  // exact symmetry and midpoint
  for (int j = 0; j <= n / 2; ++j) s(n - j) = -s(j);
  if (n % 2 == 0) s(n / 2) = 0.0;
  return s;
}

RVec clenshaw_curtis(int n) {
  // Trefethen, Spectral Methods in MATLAB, clencurt.
  RVec w = RVec::Zero(n + 1);
  const double pi = std::numbers::pi;
  RVec v = RVec::Ones(n - 1);
  if (n % 2 == 0) {
    w(0) = w(n) = 1.0 / (n * n - 1.0);
    for (int k = 1; k < n / 2; ++k)
      for (int i = 1; i < n; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * k * pi * i / n) / (4.0 * k * k - 1);
    for (int i = 1; i < n; ++i) v(i - 1) -= std::cos(pi * i) / (n * n - 1.0);
  } else {
    w(0) = w(n) = 1.0 / (n * n);
    for (int k = 1; k <= (n - 1) / 2; ++k)
      for (int i = 1; i < n; ++i) v(i - 1) -= 2.0 * std::cos(2.0 * k * pi * i / n) / (4.0 * k * k - 1);
  }
  for (int i = 1; i < n; ++i) w(i) = 2.0 * v(i - 1) / n;
  return w;
}

RVec lobatto_bary(int n) {
  RVec w(n + 1);
  for (int j = 0; j <= n; ++j) w(j) = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  return w;
}

RMat diff_matrix(const RVec& s, const RVec& w) {
  const Eigen::Index n = s.size();
  RMat d = RMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (w(j) / w(i)) / (s(i) - s(j));
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

RVec bary_row(const RVec& s, const RVec& w, double x) {
  const Eigen::Index n = s.size();
  RVec r = RVec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j)
    if (x == s(j)) {
      r(j) = 1.0;
      return r;
    }
  double den = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j) = w(j) / (x - s(j));
    den += r(j);
  }
  return r / den;
}

double GridMap::phi(double u) const {
  if (sing_lo && sing_hi) return u * u * (3.0 - 2.0 * u);
  if (sing_lo) return u * u;
  if (sing_hi) return u * (2.0 - u);
  return u;
}

double GridMap::dphi(double u) const {
  if (sing_lo && sing_hi) return 6.0 * u * (1.0 - u);
  if (sing_lo) return 2.0 * u;
  if (sing_hi) return 2.0 * (1.0 - u);
  return 1.0;
}

double GridMap::ddphi(double u) const {
  if (sing_lo && sing_hi) return 6.0 - 12.0 * u;
  if (sing_lo) return 2.0;
  if (sing_hi) return -2.0;
  return 0.0;
}

double GridMap::eps_lo(double u) const { return (hi - lo) * phi(u); }

double GridMap::eps_hi(double v) const {
  double p;
  if (sing_lo && sing_hi) p = v * v * (3.0 - 2.0 * v);
  else if (sing_lo) p = v * (2.0 - v);
  else if (sing_hi) p = v * v;
  else p = v;
  return (hi - lo) * p;
}

}  // namespace nahm
