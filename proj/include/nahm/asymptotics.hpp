#pragma once

#include "nahm/dirac_nahm.hpp"
#include "nahm/monopole_fields.hpp"
#include "nahm/report.hpp"
#include "nahm/sbtype.hpp"

#include <vector>

namespace nahm {

// Spectral positions (eigenvalues of i Phi, traceless part) along a ray.
// spectra[j][b] follows branch b across radii by continuation.
struct RayProfile {
  Vec3 direction{};
  std::vector<double> radii;
  std::vector<std::vector<double>> spectra;
};

RayProfile ray_profile(const NahmData& nd, const Vec3& direction, const std::vector<double>& radii,
                       const SolverOptions& opt = {});
// Same, with the per-radius fiber solves spread over `workers` threads.
RayProfile ray_profile(const NahmData& nd, const Vec3& direction, const std::vector<double>& radii,
                       const SolverOptions& opt, int workers);

// Branch model: position(r) = lambda + k/(2r) + c/r^2.
struct BranchFit {
  double lambda = 0, k = 0, c = 0;
  double residual = 0;  // rms over the radii
};

struct BreakingFit {
  std::vector<BranchFit> branches;     // in profile order
  std::vector<double> lambda;          // per fitted level, ascending
  std::vector<int> multiplicity;
  std::vector<std::vector<double>> k;  // per level, descending (pre-rounding)
  double trace = 0;                    // sum lambda * multiplicity
};

BreakingFit fit_mu_kappa(const RayProfile& p, double cluster_tol = 0.05);

// Compares a fit with a configured type: lambda to lambda_tol, multiplicities exactly,
// k within k_tol of the configured integers.
VerificationReport compare_fit(const BreakingFit& fit, const SymmetryBreakingType& t, double lambda_tol = 1e-3,
                               double k_tol = 0.1);

struct EnergyValues {
  double mass_form = 0;    // sum_a m_a (lambda_{a+1} - lambda_a)
  double charge_form = 0;  // -sum_a lambda_a k_a
};
EnergyValues energy(const SymmetryBreakingType& t);

// -tr sum F^2 and -tr sum (d Phi)^2 at x; F from holonomies, d Phi from the Green formula.
struct EnergyDensity {
  double curvature = 0, higgs = 0;
  double total() const { return curvature + higgs; }
};
EnergyDensity energy_density(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g, double fd_step);

// int_0^R r^2 e(r) dr along one direction; equals the normalized energy inside the
// ball for spherically symmetric data.
struct RadialEnergy {
  std::vector<double> r, density;
  double value = 0;
};
RadialEnergy radial_energy(const NahmData& nd, const Vec3& direction, double R, const SolverOptions& opt = {},
                           int panel_degree = 8);

// Real (C) and quaternionic (J) structures on spinors over the whole chain:
// (S psi)_i(t) = conj(psi_{i'}(-t)) with i' the mirrored interval and the quaternion
// slot multiplied by 1 (C) or by -i pauli_2 (J).
enum class StructureKind { Real, Quaternionic };

struct StructureMap {
  StructureKind kind = StructureKind::Real;
  std::vector<int> mirror;          // per interval
  std::vector<std::vector<int>> node_mirror;  // per interval: node j -> node of the mirrored interval
  CMat slot;                        // 2 x 2 factor on the quaternion slot
  SpinorFunction apply(const SpinorFunction& psi) const;
};

// Requires mirrored levels, ranks and Chern blocks; throws TypeNotSymmetric.
void require_mirrored_type(const SymmetryBreakingType& t);
StructureMap make_structure(const NahmData& nd, const FiberGrid& g, StructureKind kind);

// Antilinear action of S on the fiber: S Psi_b = sum_a Psi_a M_ab + defect.
struct StructureOnFiber {
  CMat M;
  double leak = 0;        // max ||(1 - Pi) S Psi_b||
  double square = 0;      // max |M conj(M) -/+ 1| (the restriction squared)
  double commutator = 0;  // ||Phi M - M conj(Phi)||, i.e. S Phi = Phi S as real maps
  double anticommutator = 0;  // ||Phi M + M conj(Phi)||
};
StructureOnFiber structure_on_fiber(const StructureMap& S, const Fiber& f, const CMat& phi);

struct SymmetryOptions {
  SolverOptions solver;
  std::vector<Vec3> points = {{0.4, -0.3, 0.7}, {-0.9, 0.6, 0.25}};
  double tol = 1e-8;
  double square_tol = 1e-10;
  double fd_step = 1e-3;
};

// Checks for the orthogonal reduction: data reality T(t) = conj T(-t), C^2 = 1 on spinors,
// C-invariance of the fiber, C Phi = Phi C and constancy of C under aligned transport.
VerificationReport check_so_symmetry(const NahmData& nd, const SymmetryOptions& opt = {});
// Same for the symplectic reduction with T(t) = -conj T(-t), J^2 = -1; throws OddRank for odd N.
VerificationReport check_sp_symmetry(const NahmData& nd, const SymmetryOptions& opt = {});

}  // namespace nahm
