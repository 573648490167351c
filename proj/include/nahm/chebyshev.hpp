#pragma once

#include "nahm/linalg.hpp"

namespace nahm {

// Chebyshev-Lobatto nodes s_j = -cos(pi j / n), ascending on [-1, 1].
RVec lobatto_nodes(int n);
// Clenshaw-Curtis weights for lobatto_nodes(n).
RVec clenshaw_curtis(int n);
// Barycentric weights for lobatto_nodes(n).
RVec lobatto_bary(int n);
// First-derivative matrix on arbitrary nodes with barycentric weights w.
RMat diff_matrix(const RVec& s, const RVec& w);
// Barycentric interpolation weights at point x (sum to one).
RVec bary_row(const RVec& s, const RVec& w, double x);

// Map from u in [0,1] to t = lo + L phi(u). Ends flagged as singular get
// a quadratic contact so that half-integer powers of the distance are smooth in u.
struct GridMap {
  double lo = 0, hi = 1;
  bool sing_lo = false, sing_hi = false;

  double phi(double u) const;
  double dphi(double u) const;
  double ddphi(double u) const;
  double t(double u) const { return lo + (hi - lo) * phi(u); }
  // Distances to the ends; eps_hi takes v = 1 - u so both avoid cancellation.
  double eps_lo(double u) const;
  double eps_hi(double v) const;
};

}  // namespace nahm
