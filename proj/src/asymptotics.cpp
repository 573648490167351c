#include "nahm/asymptotics.hpp"

#include "nahm/chebyshev.hpp"
#include "nahm/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace nahm {

namespace {

std::vector<double> positions_at(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g) {
  Fiber f = compute_fiber(nd, x, g);
  RVec e = higgs_eigenvalues(traceless_higgs(higgs(f)));
  return {e.data(), e.data() + e.size()};
}

// Permutation p minimizing sum |prev[b] - cur[p[b]]|; exhaustive for small N.
std::vector<int> continue_branches(const std::vector<double>& prev, const std::vector<double>& cur) {
  const int N = static_cast<int>(prev.size());
  std::vector<int> p(N);
  std::iota(p.begin(), p.end(), 0);
  if (N <= 7) {
    std::vector<int> best = p;
    double best_cost = 1e300;
    do {
      double c = 0;
      for (int b = 0; b < N; ++b) c += std::abs(prev[b] - cur[p[b]]);
      if (c < best_cost - 1e-15) {
        best_cost = c;
        best = p;
      }
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
  }
  std::vector<bool> used(N, false);
  for (int b = 0; b < N; ++b) {
    int k = -1;
    for (int j = 0; j < N; ++j)
      if (!used[j] && (k < 0 || std::abs(prev[b] - cur[j]) < std::abs(prev[b] - cur[k]))) k = j;
    used[k] = true;
    p[b] = k;
  }
  return p;
}

double spinor_norm(const FiberGrid& g, const SpinorFunction& s) {
  return std::sqrt(std::max(0.0, h0_inner(g, s, s).real()));
}

SpinorFunction axpy(const SpinorFunction& a, cd c, const SpinorFunction& b) {
  SpinorFunction out = a;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += c * b.v[i];
  return out;
}

}  // namespace

RayProfile ray_profile(const NahmData& nd, const Vec3& direction, const std::vector<double>& radii,
                       const SolverOptions& opt, int workers) {
  const double len = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
  if (!(len > 0)) throw NahmError("InvalidDirection", "direction must be nonzero");
  RayProfile p;
  for (int a = 0; a < 3; ++a) p.direction[a] = direction[a] / len;
  p.radii = radii;
  auto g = std::make_shared<const FiberGrid>(make_grid(nd, opt));
  std::vector<std::vector<double>> raw(radii.size());
  parallel_for(static_cast<int>(radii.size()), workers, [&](int j) {
    Vec3 x{p.direction[0] * radii[j], p.direction[1] * radii[j], p.direction[2] * radii[j]};
    raw[j] = positions_at(nd, x, g);
  });
  for (size_t j = 0; j < raw.size(); ++j) {
    if (j == 0) {
      p.spectra.push_back(raw[0]);
      continue;
    }
    std::vector<int> perm = continue_branches(p.spectra.back(), raw[j]);
    std::vector<double> row(raw[j].size());
    for (size_t b = 0; b < row.size(); ++b) row[b] = raw[j][perm[b]];
    p.spectra.push_back(row);
  }
  return p;
}

RayProfile ray_profile(const NahmData& nd, const Vec3& direction, const std::vector<double>& radii,
                       const SolverOptions& opt) {
  return ray_profile(nd, direction, radii, opt, 1);
}

BreakingFit fit_mu_kappa(const RayProfile& p, double cluster_tol) {
  const int R = static_cast<int>(p.radii.size());
  if (R < 3) throw NahmError("FitIllConditioned", "need at least three radii");
  double rmin = 1e300, rmax = 0;
  for (double r : p.radii) {
    if (!(r > 0)) throw NahmError("FitIllConditioned", "radii must be positive");
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (rmax < 4 * rmin) throw NahmError("FitIllConditioned", "radii must span a factor of at least 4");
  if (static_cast<int>(p.spectra.size()) != R) throw NahmError("FitIllConditioned", "profile shape");
  RMat A(R, 3);
  for (int j = 0; j < R; ++j) {
    const double r = p.radii[j];
    A(j, 0) = 1;
    A(j, 1) = 1 / (2 * r);
    A(j, 2) = 1 / (r * r);
  }
  Eigen::ColPivHouseholderQR<RMat> qr(A);
  if (qr.rank() < 3) throw NahmError("FitIllConditioned", "design matrix is rank deficient");

  BreakingFit fit;
  const int N = static_cast<int>(p.spectra.front().size());
  for (int b = 0; b < N; ++b) {
    RVec y(R);
    for (int j = 0; j < R; ++j) y(j) = p.spectra[j].at(b);
    RVec c = qr.solve(y);
    BranchFit bf{c(0), c(1), c(2), std::sqrt((A * c - y).squaredNorm() / R)};
    fit.branches.push_back(bf);
  }
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return fit.branches[a].lambda < fit.branches[b].lambda; });
  std::vector<std::vector<int>> groups;
  for (int b : order) {
    if (groups.empty() || fit.branches[b].lambda - fit.branches[groups.back().back()].lambda > cluster_tol)
      groups.emplace_back();
    groups.back().push_back(b);
  }
  for (const auto& grp : groups) {
    double s = 0;
    std::vector<double> ks;
    for (int b : grp) {
      s += fit.branches[b].lambda;
      ks.push_back(fit.branches[b].k);
    }
    std::sort(ks.rbegin(), ks.rend());
    fit.lambda.push_back(s / grp.size());
    fit.multiplicity.push_back(static_cast<int>(grp.size()));
    fit.k.push_back(ks);
    fit.trace += s;
  }
  return fit;
}

VerificationReport compare_fit(const BreakingFit& fit, const SymmetryBreakingType& t, double lambda_tol,
                               double k_tol) {
  VerificationReport rep;
  const int n = static_cast<int>(t.lambda.size());
  const bool same_levels = static_cast<int>(fit.lambda.size()) == n;
  rep.add("fit:level_count", same_levels, static_cast<double>(fit.lambda.size()), n);
  if (!same_levels) return rep;
  double dl = 0, dk = 0;
  bool ranks_ok = true, ints_ok = true;
  for (int a = 0; a < n; ++a) {
    dl = std::max(dl, std::abs(fit.lambda[a] - t.lambda[a]));
    if (fit.multiplicity[a] != t.ranks[a]) {
      ranks_ok = false;
      continue;
    }
    std::vector<int> want = t.chern[a];
    std::sort(want.rbegin(), want.rend());
    for (size_t b = 0; b < want.size(); ++b) {
      const double k = fit.k[a][b];
      dk = std::max(dk, std::abs(k - want[b]));
      if (std::lround(k) != want[b]) ints_ok = false;
    }
  }
  rep.bound("fit:lambda", dl, lambda_tol);
  rep.add("fit:multiplicity", ranks_ok, ranks_ok ? 0.0 : 1.0, 0.0);
  rep.add("fit:chern", ranks_ok && ints_ok && dk < k_tol, dk, k_tol);
  rep.bound("fit:trace", std::abs(fit.trace), lambda_tol * std::max(1, static_cast<int>(fit.branches.size())));
  return rep;
}

EnergyValues energy(const SymmetryBreakingType& t) {
  DerivedInvariants inv = validate_type(t);
  EnergyValues e;
  for (int a = 0; a + 1 < inv.n; ++a) e.mass_form += inv.m(a) * (t.lambda[a + 1] - t.lambda[a]);
  for (int a = 0; a < inv.n; ++a) e.charge_form -= t.lambda[a] * inv.levels[a].k;
  return e;
}

EnergyDensity energy_density(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g, double fd_step) {
  const double h = fd_step > 0 ? fd_step : default_fd_step(x);
  Fiber f = compute_fiber(nd, x, g);
  GreenSolver G(nd, g, x);
  auto dphi = dphi_green(f, G);
  EnergyDensity e;
  for (int c = 0; c < 3; ++c) {
    e.higgs -= (dphi[c] * dphi[c]).trace().real();
    CMat F = curvature_fd(nd, f, (c + 1) % 3, (c + 2) % 3, h);
    e.curvature -= (F * F).trace().real();
  }
  return e;
}

RadialEnergy radial_energy(const NahmData& nd, const Vec3& direction, double R, const SolverOptions& opt,
                           int panel_degree) {
  const double len = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
  if (!(len > 0) || !(R > 0)) throw NahmError("InvalidDirection", "direction and radius must be positive");
  std::vector<double> br{0.0};
  for (double b = 0.5; b < R; b *= 2) br.push_back(b);
  br.push_back(R);
  auto g = std::make_shared<const FiberGrid>(make_grid(nd, opt));
  RVec s = lobatto_nodes(panel_degree), w = clenshaw_curtis(panel_degree);
  std::map<double, double> dens;
  RadialEnergy out;
  for (size_t p = 0; p + 1 < br.size(); ++p) {
    const double a = br[p], b = br[p + 1];
    for (int j = 0; j <= panel_degree; ++j) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * s(j);
      auto it = dens.find(r);
      if (it == dens.end()) {
        Vec3 x{direction[0] / len * r, direction[1] / len * r, direction[2] / len * r};
        it = dens.emplace(r, energy_density(nd, x, g, 0).total()).first;
      }
      out.value += 0.5 * (b - a) * w(j) * r * r * it->second;
    }
  }
  for (const auto& [r, e] : dens) {
    out.r.push_back(r);
    out.density.push_back(e);
  }
  return out;
}

void require_mirrored_type(const SymmetryBreakingType& t) {
  DerivedInvariants inv = validate_type(t);
  const int n = inv.n;
  for (int a = 0; a < n; ++a) {
    const int b = n - 1 - a;
    if (std::abs(t.lambda[a] + t.lambda[b]) > 1e-12 * std::max(1.0, std::abs(t.lambda[a])))
      throw NahmError("TypeNotSymmetric", "levels are not mirrored about zero");
    const auto& la = inv.levels[a];
    const auto& lb = inv.levels[b];
    if (la.r_plus != lb.r_minus || la.r_minus != lb.r_plus || la.r_zero != lb.r_zero)
      throw NahmError("TypeNotSymmetric", "multiplicities are not mirrored");
    if (la.blocks_plus != lb.blocks_minus || la.blocks_minus != lb.blocks_plus)
      throw NahmError("TypeNotSymmetric", "Chern blocks are not mirrored");
  }
}

SpinorFunction StructureMap::apply(const SpinorFunction& psi) const {
  SpinorFunction out;
  out.v.resize(psi.v.size());
  for (size_t i = 0; i < psi.v.size(); ++i) {
    const CMat& src = psi.v[mirror[i]];
    CMat& dst = out.v[i];
    dst.resize(src.rows(), src.cols());
    const auto& nm = node_mirror[i];
    for (int j = 0; j < static_cast<int>(nm.size()); ++j) {
      for (int r = 0; r < src.rows() / 2; ++r) {
        const cd a = std::conj(src(2 * r, nm[j])), b = std::conj(src(2 * r + 1, nm[j]));
        dst(2 * r, j) = slot(0, 0) * a + slot(0, 1) * b;
        dst(2 * r + 1, j) = slot(1, 0) * a + slot(1, 1) * b;
      }
    }
  }
  return out;
}

StructureMap make_structure(const NahmData& nd, const FiberGrid& g, StructureKind kind) {
  require_mirrored_type(nd.type);
  StructureMap S;
  S.kind = kind;
  S.slot = kind == StructureKind::Real ? CMat(CMat::Identity(2, 2)) : sigma()[1];
  const int I = nd.n_intervals();
  for (int i = 0; i < I; ++i) {
    const int k = I - 1 - i;
    const auto& a = g.iv[i];
    const auto& b = g.iv[k];
    if (a.m != b.m || a.nodes() != b.nodes())
      throw NahmError("GridNotSymmetric", "mirrored intervals have different shapes");
    std::vector<int> nm(a.nodes());
    const double L = a.hi - a.lo;
    for (int j = 0; j < a.nodes(); ++j) {
      nm[j] = b.nodes() - 1 - j;
      if (std::abs(a.t[j] + b.t[nm[j]]) > 1e-11 * std::max(1.0, L))
        throw NahmError("GridNotSymmetric", "quadrature nodes are not mirrored");
    }
    S.mirror.push_back(k);
    S.node_mirror.push_back(std::move(nm));
  }
  return S;
}

StructureOnFiber structure_on_fiber(const StructureMap& S, const Fiber& f, const CMat& phi) {
  const int N = f.dimension();
  const FiberGrid& g = *f.grid;
  StructureOnFiber out;
  out.M.resize(N, N);
  std::vector<SpinorFunction> img;
  for (int b = 0; b < N; ++b) {
    img.push_back(S.apply(f.basis[b]));
    for (int a = 0; a < N; ++a) out.M(a, b) = h0_inner(g, f.basis[a], img[b]);
  }
  for (int b = 0; b < N; ++b) {
    SpinorFunction d = img[b];
    for (int a = 0; a < N; ++a) d = axpy(d, -out.M(a, b), f.basis[a]);
    out.leak = std::max(out.leak, spinor_norm(g, d));
  }
  const double sign = S.kind == StructureKind::Real ? 1.0 : -1.0;
  CMat sq = out.M * out.M.conjugate() - sign * CMat::Identity(N, N);
  out.square = max_abs(sq);
  out.commutator = norm2(CMat(phi * out.M - out.M * phi.conjugate()));
  out.anticommutator = norm2(CMat(phi * out.M + out.M * phi.conjugate()));
  return out;
}

namespace {

VerificationReport check_structure(const NahmData& nd, const SymmetryOptions& opt, StructureKind kind) {
  const bool real = kind == StructureKind::Real;
  const std::string tag = real ? "so" : "sp";
  require_mirrored_type(nd.type);
  if (!real && nd.inv.N % 2 != 0) throw NahmError("OddRank", "a quaternionic structure needs even rank");
  auto g = std::make_shared<const FiberGrid>(make_grid(nd, opt.solver));
  StructureMap S = make_structure(nd, *g, kind);
  VerificationReport rep;

  // Data condition T(t) = s conj T(-t) and temporal gauge on interior nodes.
  {
    const double s = real ? 1.0 : -1.0;
    double worst = 0, t0 = 0;
    for (int i = 0; i < nd.n_intervals(); ++i) {
      const auto& iv = g->iv[i];
      const auto& fa = *nd.intervals[i].field;
      const auto& fb = *nd.intervals[S.mirror[i]].field;
      const double L = iv.hi - iv.lo, guard = opt.solver.collar_rel * L;
      for (int j = 0; j < iv.nodes(); ++j) {
        const double t = iv.t[j];
        if (t - iv.lo < guard || iv.hi - t < guard) continue;
        Triple Ta, Tb;
        CMat A0, B0;
        fa.eval(t, Ta, A0);
        fb.eval(-t, Tb, B0);
        for (int c = 0; c < 3; ++c) {
          const double scale = std::max(1.0, max_abs(Ta[c]));
          worst = std::max(worst, max_abs(CMat(Ta[c] - s * Tb[c].conjugate())) / scale);
        }
        t0 = std::max(t0, max_abs(A0));
      }
    }
    rep.bound(tag + ":data_symmetry", worst, opt.tol);
    rep.bound(tag + ":temporal_gauge", t0, opt.tol);
  }

  const double sign = real ? 1.0 : -1.0;
  double sq_spinor = 0, leak = 0, sq_fiber = 0, comm = 0, spec = 0, constancy = 0;
  for (const Vec3& x : opt.points) {
    Fiber f = compute_fiber(nd, x, g);
    CMat phi = higgs(f);
    for (const auto& b : f.basis) {
      SpinorFunction d = axpy(S.apply(S.apply(b)), -sign, b);
      double m = 0, n0 = 0;
      for (size_t i = 0; i < d.v.size(); ++i) {
        m = std::max(m, d.v[i].cwiseAbs().maxCoeff());
        n0 = std::max(n0, b.v[i].cwiseAbs().maxCoeff());
      }
      sq_spinor = std::max(sq_spinor, m / std::max(n0, 1e-300));
    }
    StructureOnFiber sf = structure_on_fiber(S, f, phi);
    leak = std::max(leak, sf.leak);
    sq_fiber = std::max(sq_fiber, sf.square);
    comm = std::max(comm, sf.commutator);
    RVec e = higgs_eigenvalues(phi);
    for (int k = 0; k < e.size(); ++k) spec = std::max(spec, std::abs(e(k) + e(e.size() - 1 - k)));
    for (int a = 0; a < 3; ++a) {
      CMat Mal[2];
      for (int sgn = 0; sgn < 2; ++sgn) {
        Vec3 y = x;
        y[a] += sgn == 0 ? opt.fd_step : -opt.fd_step;
        Fiber fy = compute_fiber(nd, y, g);
        CMat W = polar_transport(f, fy);
        StructureOnFiber sy = structure_on_fiber(S, fy, higgs(fy));
        Mal[sgn] = W.adjoint() * sy.M * W.conjugate();
      }
      constancy = std::max(constancy, norm2(CMat((Mal[0] - Mal[1]) / (2 * opt.fd_step))));
    }
  }
  const std::string op = real ? "C" : "J";
  rep.bound(tag + ":" + op + "^2_on_spinors", sq_spinor, opt.square_tol);
  rep.bound(tag + ":fiber_invariance", leak, opt.tol);
  rep.bound(tag + ":" + op + "^2_on_fiber", sq_fiber, opt.square_tol);
  rep.bound(tag + ":commutes_with_phi", comm, opt.tol, "Phi M - M conj(Phi), M = <Psi_a, S Psi_b>");
  rep.bound(tag + ":spectrum_symmetry", spec, opt.tol);
  rep.bound(tag + ":covariant_constancy", constancy, 1e3 * opt.tol);
  return rep;
}

}  // namespace

VerificationReport check_so_symmetry(const NahmData& nd, const SymmetryOptions& opt) {
  return check_structure(nd, opt, StructureKind::Real);
}

VerificationReport check_sp_symmetry(const NahmData& nd, const SymmetryOptions& opt) {
  return check_structure(nd, opt, StructureKind::Quaternionic);
}

}  // namespace nahm
