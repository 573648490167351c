#pragma once

#include "nahm/linalg.hpp"
#include "nahm/nahm_core.hpp"
#include "nahm/report.hpp"

#include <memory>
#include <vector>

namespace nahm {

struct SolverOptions {
  int degree = 16;           // Lobatto degree per panel
  int panels_per_half = 6;   // graded panels between the collar and the midpoint
  double collar_rel = 1e-3;  // collar width / interval length
  double init_rel = 1e-7;    // Frobenius start offset / interval length at pole ends
  int log_panels = 2;        // panels in log(eps) between the start offset and the collar
  double step_scale = 0.2;   // bound on |h A| per substep
  double step_tol = 1e-12;   // embedded error bound per node interval
  double svd_rel = 1e-8;     // kernel threshold relative to the largest singular value
  double min_gap = 1e3;
};

// Leading coefficient B0 = -sum rho_a (x) sigma_a of the spinor ODE at a pole end,
// written as eps d/d(eps) psi = B0 psi + O(eps).
struct ExponentTable {
  std::vector<double> nu;        // ascending
  CMat vectors;                  // orthonormal eigenvectors, columns match nu
  std::vector<bool> admissible;  // nu > -1/2
  int admissible_count = 0;
};
ExponentTable local_exponents(const Triple& residue);

// Quadrature/collocation grid of one interval. Panels are Lobatto blocks in a
// panel variable z in [-1,1]; bulk panels are affine in t, collar panels at pole
// ends are affine in log(eps).
struct IntervalGrid {
  enum class Map { Affine, LogLeft, LogRight };
  // t(z) = c + h z (affine), lo + exp(c + h z) (LogLeft), hi - exp(c - h z) (LogRight).
  struct Panel {
    int first = 0;  // global node index of z = -1
    Map map = Map::Affine;
    double c = 0, h = 0;
  };
  double lo = 0, hi = 0, mid = 0;
  bool sing[2] = {false, false};
  int m = 0;
  int deg = 0;
  int mid_index = 0;
  std::vector<Panel> panels;
  std::vector<double> t, w;    // nodes ascending and quadrature weights
  std::vector<double> tz, tzz;  // dt/dz, d2t/dz2 at each node (per owning panel; shared nodes use the left panel)
  std::vector<double> tz_right, tzz_right;  // same from the right panel at shared nodes
  // Analytic collar contribution over the part of the end not covered by nodes:
  // <psi, phi> += psi(end)^dagger tail[s] phi(end).
  CMat tail[2];
  ExponentTable exps[2];
  double t_of(const Panel& p, double z) const;
  double tz_of(const Panel& p, double z) const;
  double tzz_of(const Panel& p, double z) const;
  int nodes() const { return static_cast<int>(t.size()); }
};

struct FiberGrid {
  SolverOptions opt;
  std::vector<IntervalGrid> iv;
};

FiberGrid make_grid(const NahmData& nd, const SolverOptions& opt = {});

// Values per interval as 2m x nodes matrices (column j is the spinor at node j).
struct SpinorFunction {
  std::vector<CMat> v;
};

SpinorFunction zero_spinor(const FiberGrid& g);

// Admissible solutions from one end, marched to the midpoint with QR at every node.
struct ShootingBasis {
  int interval = 0;
  Side end = Side::Left;
  std::vector<int> node;   // node indices from the end to the midpoint
  std::vector<CMat> Q;     // orthonormal bases at those nodes (2m x p)
  std::vector<CMat> R;     // R[j] maps coefficients at node j-1 to node j (R[0] unused)
  int columns() const { return Q.empty() ? 0 : static_cast<int>(Q.front().cols()); }
  const CMat& at_mid() const { return Q.back(); }
  const CMat& at_end() const { return Q.front(); }
  // Coefficients at the midpoint from coefficients at the end node.
  CMat end_to_mid(const CMat& c) const;
  // Fills values of the solutions with midpoint coefficients d on the half.
  void fill(const CVec& d, CMat& values) const;
};

ShootingBasis shoot_solutions(const NahmData& nd, const FiberGrid& g, const Vec3& x, int interval, Side end);

// Matrix of the spinor ODE psi' = A psi defining the cokernel, A = -T0 + sum (T_a - i x_a) (x) sigma_a.
CMat cokernel_matrix(const TField& f, double t, const Vec3& x);

struct MatchingSystem {
  RVec singular_values;
  CMat D;                       // sum dim V  x  sum dim U
  std::vector<int> dim_u;       // per level
  std::vector<int> dim_u_expected;
  std::vector<int> dim_v;       // per interval
  int index() const;
  // Column layout: level a owns columns [col0[a], col0[a] + dim_u[a]).
  std::vector<int> col0, row0;
  // Per level: coefficient maps from U-coordinates to midpoint coefficients
  // of the adjacent half-interval bases (left neighbour interval's right half, right neighbour's left half).
  std::vector<CMat> to_right_half_of_prev, to_left_half_of_next;
  std::vector<ShootingBasis> left, right;  // per interval
};

MatchingSystem assemble_matching(const NahmData& nd, const FiberGrid& g, const Vec3& x);

struct Fiber {
  Vec3 x{};
  std::shared_ptr<const FiberGrid> grid;
  std::vector<SpinorFunction> basis;
  double gram_residual = 0;  // max |G - 1| of the orthonormalized basis
  RVec singular_values;
  double gap = 0;
  int rank_deficit = 0;
  std::vector<int> dim_u, dim_v;
  int dimension() const { return static_cast<int>(basis.size()); }
};

Fiber compute_fiber(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g);
Fiber compute_fiber(const NahmData& nd, const Vec3& x, const SolverOptions& opt = {});

// i(psi' + T0 psi) +- Q psi with Q = sum (i T_a + x_a) (x) sigma_a; adjoint selects the minus sign.
SpinorFunction apply_dirac(const NahmData& nd, const FiberGrid& g, const Vec3& x, const SpinorFunction& psi,
                           bool adjoint);
// Nodewise derivative d psi / dt from panel differentiation (shared nodes averaged).
SpinorFunction derivative(const FiberGrid& g, const SpinorFunction& psi);

enum class BcMode { H1, Cokernel };
VerificationReport check_boundary_conditions(const NahmData& nd, const FiberGrid& g, const SpinorFunction& psi,
                                             BcMode mode, double tol = 1e-8);

cd h0_inner(const FiberGrid& g, const SpinorFunction& psi, const SpinorFunction& phi);
// Inner product with an extra factor f(t) at the nodes (used for multiplication by t).
cd h0_inner_weighted(const FiberGrid& g, const SpinorFunction& psi, const SpinorFunction& phi, bool times_t);
double h1_norm(const FiberGrid& g, const SpinorFunction& psi);

// Left multiplication by 1 (x) sigma_a on every interval.
SpinorFunction apply_sigma(const SpinorFunction& psi, int alpha);

// Spectrum of the Higgs field and kernel diagnostics in JSON form.
json fiber_report(const Fiber& f);

}  // namespace nahm
