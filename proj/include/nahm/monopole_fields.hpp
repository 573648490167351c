#pragma once

#include "nahm/dirac_nahm.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <array>
#include <memory>

namespace nahm {

// Phi_ab = <Psi_a, -i t Psi_b>, skew-symmetrized.
CMat higgs(const Fiber& f);
// Eigenvalues of i Phi in ascending order (the "spectral positions" of the fiber).
RVec higgs_eigenvalues(const CMat& phi);
CMat traceless_higgs(const CMat& phi);

// Collocated H = D* D with H1 boundary conditions, factorized once per point.
// H psi = -psi'' - 2 T0 psi' + K psi with
// K = -(T0' + T0^2) + i (Q' + [T0, Q]) - Q^2 and Q = sum (i T_a + x_a) (x) sigma_a.
class GreenSolver {
 public:
  GreenSolver(const NahmData& nd, std::shared_ptr<const FiberGrid> g, const Vec3& x);
  // Solves H u = rhs; residual receives the relative residual of the collocated system.
  SpinorFunction solve(const SpinorFunction& rhs, double* residual = nullptr) const;
  int unknowns() const { return n_; }

 private:
  std::shared_ptr<const FiberGrid> g_;
  std::vector<int> off_;
  int n_ = 0;
  std::vector<int> row_src_;  // per row: unknown whose right-hand side value it carries, or -1
  std::vector<double> row_scale_;
  Eigen::SparseMatrix<cd> S_;
  Eigen::SparseLU<Eigen::SparseMatrix<cd>, Eigen::COLAMDOrdering<int>> lu_;
};

struct GreenSolve {
  SpinorFunction rhs, solution;
  double residual = 0;
};
GreenSolve green_apply(const NahmData& nd, const Vec3& x, const SpinorFunction& rhs,
                       std::shared_ptr<const FiberGrid> g);

// (d_g Phi)_ab = -2 <Psi_a, sigma_g G Psi_b> for g = 1..3 (index 0..2).
std::array<CMat, 3> dphi_green(const Fiber& f, const GreenSolver& G);
// F_{ab} for the pair (a,b); F_{23}, F_{31}, F_{12} share the pairing of d_1, d_2, d_3 Phi.
CMat curvature_green(const Fiber& f, const GreenSolver& G, int alpha, int beta);

// Frames at x +- h e_a aligned to the base frame by the unitary polar factor of the overlap.
struct FdConnection {
  double h = 0;
  std::array<CMat, 3> w_plus, w_minus;  // coefficient transports from x to x +- h e_a
  std::array<CMat, 3> connection;       // Berry connection in the aligned frame
  std::array<CMat, 3> dphi;             // central difference of the transported Higgs field
};
FdConnection connection_fd(const NahmData& nd, const Fiber& base, double h);

// Curvature F_{ab} from the holonomy of polar transports around the square of side h
// centred at x in the (a,b) plane: U = 1 - h^2 F + O(h^4).
CMat curvature_fd(const NahmData& nd, const Fiber& base, int alpha, int beta, double h);

// Transport between fibers over nearby points: maps coefficients in a to coefficients in b.
CMat polar_transport(const Fiber& a, const Fiber& b);

double default_fd_step(const Vec3& x);

struct FieldSample {
  Vec3 x{};
  CMat phi;
  RVec eigenvalues;                 // of i Phi
  std::array<CMat, 3> connection;   // aligned frame
  std::array<CMat, 3> curvature;    // F_23, F_31, F_12 (Green path)
  std::array<CMat, 3> dphi;         // Green path
  std::array<CMat, 3> curvature_fd, dphi_fd;
  double bogomolny_residual = 0;    // max of the two cross differences
  double cross_f_fd = 0, cross_dphi_fd = 0;
  double dphi_mismatch = 0;         // Green vs FD d Phi, relative
  double green_residual = 0;
  double fiber_gap = 0;
  std::string frame_id;
};

struct FieldOptions {
  SolverOptions solver;
  double fd_step = 0;  // 0 selects default_fd_step
};

FieldSample sample_fields(const NahmData& nd, const Vec3& x, const FieldOptions& opt = {});
FieldSample sample_fields(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g, double fd_step);

double bogomolny_residual(const NahmData& nd, const Vec3& x, double h, const SolverOptions& opt = {});

}  // namespace nahm
