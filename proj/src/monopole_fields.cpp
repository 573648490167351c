#include "nahm/monopole_fields.hpp"

#include "nahm/chebyshev.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>

namespace nahm {

namespace {

using Row = std::vector<std::pair<int, cd>>;

struct RowBuilder {
  std::vector<Row> rows;
  std::vector<int> src;

  int open(int k, int src0 = -1) {
    const int r0 = static_cast<int>(rows.size());
    for (int j = 0; j < k; ++j) {
      rows.emplace_back();
      src.push_back(src0 < 0 ? -1 : src0 + j);
    }
    return r0;
  }
  void put(int r0, int c0, const CMat& B) {
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j)
        if (B(i, j) != cd(0)) rows[r0 + i].push_back({c0 + static_cast<int>(j), B(i, j)});
  }
};

struct NodeCoeffs {
  CMat T0e, Q, K;
};

NodeCoeffs coefficients(const TField& f, double t, const Vec3& x) {
  Triple T, dT;
  CMat T0, dT0;
  f.eval(t, T, T0);
  f.deriv(t, dT, dT0);
  const int m = f.dim();
  const CMat I2 = CMat::Identity(2, 2);
  NodeCoeffs c;
  c.T0e = kron(T0, I2);
  c.Q = CMat::Zero(2 * m, 2 * m);
  CMat Qp = CMat::Zero(2 * m, 2 * m);
  for (int a = 0; a < 3; ++a) {
    c.Q += kron(I1 * T[a] + x[a] * CMat::Identity(m, m), sigma()[a]);
    Qp += kron(I1 * dT[a], sigma()[a]);
  }
  c.K = -(kron(dT0, I2) + c.T0e * c.T0e) + I1 * (Qp + c.T0e * c.Q - c.Q * c.T0e) - c.Q * c.Q;
  return c;
}

int cyclic_third(int a, int b) { return 3 - a - b; }
double levi(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0.0;
  return ((b - a + 3) % 3 == 1 && (c - b + 3) % 3 == 1) ? 1.0 : -1.0;
}

}  // namespace

CMat higgs(const Fiber& f) {
  const int N = f.dimension();
  CMat M(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) M(a, b) = h0_inner_weighted(*f.grid, f.basis[a], f.basis[b], true);
  return skew_part(CMat(-I1 * M));
}

RVec higgs_eigenvalues(const CMat& phi) {
  Eigen::SelfAdjointEigenSolver<CMat> es(herm_part(CMat(I1 * phi)), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

CMat traceless_higgs(const CMat& phi) {
  const auto N = phi.rows();
  if (N == 0) return phi;
  return phi - (phi.trace() / static_cast<double>(N)) * CMat::Identity(N, N);
}

GreenSolver::GreenSolver(const NahmData& nd, std::shared_ptr<const FiberGrid> gp, const Vec3& x) : g_(std::move(gp)) {
  const FiberGrid& g = *g_;
  const int ni = static_cast<int>(g.iv.size());
  for (int i = 0; i < ni; ++i) {
    off_.push_back(n_);
    n_ += 2 * g.iv[i].m * g.iv[i].nodes();
  }
  RowBuilder rb;
  const CMat I2 = CMat::Identity(2, 2);

  for (int i = 0; i < ni; ++i) {
    const IntervalGrid& G = g.iv[i];
    const int m2 = 2 * G.m;
    if (m2 == 0) continue;
    const TField& f = *nd.intervals[i].field;
    const RMat Dz = diff_matrix(lobatto_nodes(G.deg), lobatto_bary(G.deg));
    const RMat Dzz = Dz * Dz;
    const CMat Id = CMat::Identity(m2, m2);
    for (size_t p = 0; p < G.panels.size(); ++p) {
      const int first = G.panels[p].first;
      for (int j = 1; j < G.deg; ++j) {
        const int n = first + j;
        NodeCoeffs c = coefficients(f, G.t[n], x);
        const double tz = G.tz[n], tzz = G.tzz[n];
        const int r0 = rb.open(m2, off_[i] + n * m2);
        for (int l = 0; l <= G.deg; ++l) {
          CMat B = (-(Dzz(j, l) - tzz / tz * Dz(j, l)) / (tz * tz)) * Id - (2.0 * Dz(j, l) / tz) * c.T0e;
          if (l == j) B += c.K;
          rb.put(r0, off_[i] + (first + l) * m2, B);
        }
      }
      if (p + 1 < G.panels.size()) {
        const int n = first + G.deg;
        const int r0 = rb.open(m2);
        for (int l = 0; l <= G.deg; ++l) {
          rb.put(r0, off_[i] + (first + l) * m2, (Dz(G.deg, l) / G.tz[n]) * Id);
          rb.put(r0, off_[i] + (n + l) * m2, (-Dz(0, l) / G.tz_right[n]) * Id);
        }
      }
    }
  }

  // Boundary blocks: value and Dirac operator at an interval end, premultiplied by P.
  auto end_node = [&](int i, Side s) { return s == Side::Left ? 0 : g.iv[i].nodes() - 1; };
  auto put_value = [&](int r0, int i, Side s, const CMat& P) {
    rb.put(r0, off_[i] + end_node(i, s) * 2 * g.iv[i].m, P);
  };
  auto put_dirac = [&](int r0, int i, Side s, const CMat& P) {
    const IntervalGrid& G = g.iv[i];
    const int m2 = 2 * G.m;
    const RMat Dz = diff_matrix(lobatto_nodes(G.deg), lobatto_bary(G.deg));
    const int n = end_node(i, s);
    const int first = s == Side::Left ? 0 : n - G.deg;
    const int jrow = s == Side::Left ? 0 : G.deg;
    NodeCoeffs c = coefficients(*nd.intervals[i].field, G.t[n], x);
    for (int l = 0; l <= G.deg; ++l) {
      CMat B = (I1 * Dz(jrow, l) / G.tz[n]) * P;
      if (first + l == n) B += P * (I1 * c.T0e + c.Q);
      rb.put(r0, off_[i] + (first + l) * m2, B);
    }
  };
  const int nl = nd.inv.n;
  for (int a = 0; a < nl; ++a) {
    const bool prev = a > 0 && g.iv[a - 1].m > 0, next = a < ni && g.iv[a].m > 0;
    if (a == 0 || a == nl - 1) {
      const int i = a == 0 ? 0 : ni - 1;
      const int m2 = 2 * g.iv[i].m;
      if (m2 == 0) continue;
      put_value(rb.open(m2), i, a == 0 ? Side::Left : Side::Right, CMat::Identity(m2, m2));
      continue;
    }
    const auto& Sm = nd.xyz(a - 1, Side::Right);
    const auto& Sp = nd.xyz(a, Side::Left);
    if (prev) {
      CMat P(Sm.X.cols() + Sm.Y.cols(), Sm.X.rows());
      P << Sm.X.adjoint(), Sm.Y.adjoint();
      if (P.rows()) put_value(rb.open(static_cast<int>(P.rows())), a - 1, Side::Right, P);
    }
    if (next) {
      CMat P(Sp.X.cols() + Sp.Y.cols(), Sp.X.rows());
      P << Sp.X.adjoint(), Sp.Y.adjoint();
      if (P.rows()) put_value(rb.open(static_cast<int>(P.rows())), a, Side::Left, P);
    }
    if (prev && next && Sp.Z.cols() > 0) {
      const int dz = static_cast<int>(Sp.Z.cols());
      CMat Mz = Sp.Z.adjoint() * kron(nd.framing.cmap[a], I2) * Sm.Z;
      int r0 = rb.open(dz);
      put_value(r0, a, Side::Left, Sp.Z.adjoint());
      put_value(r0, a - 1, Side::Right, CMat(-Mz * Sm.Z.adjoint()));
      r0 = rb.open(dz);
      put_dirac(r0, a, Side::Left, Sp.Z.adjoint());
      put_dirac(r0, a - 1, Side::Right, CMat(-Mz * Sm.Z.adjoint()));
    }
  }
  if (static_cast<int>(rb.rows.size()) != n_)
    throw NahmError("SolveFailure", "collocation system has " + std::to_string(rb.rows.size()) + " rows for " +
                                        std::to_string(n_) + " unknowns");

  std::vector<Eigen::Triplet<cd>> trip;
  row_scale_.assign(n_, 1.0);
  for (int r = 0; r < n_; ++r) {
    double mx = 0;
    for (const auto& e : rb.rows[r]) mx = std::max(mx, std::abs(e.second));
    if (mx == 0) throw NahmError("SolveFailure", "empty collocation row");
    row_scale_[r] = 1.0 / mx;
    for (const auto& e : rb.rows[r]) trip.emplace_back(r, e.first, e.second * row_scale_[r]);
  }
  row_src_ = rb.src;
  S_.resize(n_, n_);
  S_.setFromTriplets(trip.begin(), trip.end());
  S_.makeCompressed();
  lu_.analyzePattern(S_);
  lu_.factorize(S_);
  if (lu_.info() != Eigen::Success) throw NahmError("SolveFailure", "sparse factorization failed");
}

SpinorFunction GreenSolver::solve(const SpinorFunction& rhs, double* residual) const {
  const FiberGrid& g = *g_;
  CVec flat(n_);
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const int m2 = 2 * g.iv[i].m;
    for (int n = 0; n < g.iv[i].nodes(); ++n)
      for (int c = 0; c < m2; ++c) flat(off_[i] + n * m2 + c) = rhs.v[i](c, n);
  }
  CVec b = CVec::Zero(n_);
  for (int r = 0; r < n_; ++r)
    if (row_src_[r] >= 0) b(r) = flat(row_src_[r]) * row_scale_[r];
  CVec u = lu_.solve(b);
  if (lu_.info() != Eigen::Success || !u.allFinite()) throw NahmError("SolveFailure", "sparse solve failed");
  const double res = (S_ * u - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  if (residual) *residual = res;
  if (res > 1e-8) throw NahmError("SolveFailure", "collocation residual " + std::to_string(res));
  SpinorFunction out = zero_spinor(g);
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const int m2 = 2 * g.iv[i].m;
    for (int n = 0; n < g.iv[i].nodes(); ++n)
      for (int c = 0; c < m2; ++c) out.v[i](c, n) = u(off_[i] + n * m2 + c);
  }
  return out;
}

GreenSolve green_apply(const NahmData& nd, const Vec3& x, const SpinorFunction& rhs,
                       std::shared_ptr<const FiberGrid> g) {
  GreenSolver G(nd, std::move(g), x);
  GreenSolve out;
  out.rhs = rhs;
  out.solution = G.solve(rhs, &out.residual);
  return out;
}

std::array<CMat, 3> dphi_green(const Fiber& f, const GreenSolver& G) {
  const int N = f.dimension();
  std::vector<SpinorFunction> u;
  for (const auto& b : f.basis) u.push_back(G.solve(b));
  std::array<CMat, 3> out;
  for (int c = 0; c < 3; ++c) {
    CMat D(N, N);
    for (int b = 0; b < N; ++b) {
      SpinorFunction s = apply_sigma(u[b], c);
      for (int a = 0; a < N; ++a) D(a, b) = -2.0 * h0_inner(*f.grid, f.basis[a], s);
    }
    out[c] = skew_part(D);
  }
  return out;
}

CMat curvature_green(const Fiber& f, const GreenSolver& G, int alpha, int beta) {
  const int N = f.dimension();
  if (alpha == beta) return CMat::Zero(N, N);
  const int c = cyclic_third(alpha, beta);
  return levi(alpha, beta, c) * dphi_green(f, G)[c];
}

CMat polar_transport(const Fiber& a, const Fiber& b) {
  const int N = a.dimension();
  CMat O(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) O(i, j) = h0_inner(*a.grid, b.basis[i], a.basis[j]);
  Eigen::JacobiSVD<CMat> svd(O);
  if (N > 0 && svd.singularValues()(N - 1) < 0.3)
    throw NahmError("AlignmentDegenerate", "fiber overlap lost rank; the step is too large");
  return polar_unitary(O);
}

double default_fd_step(const Vec3& x) {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  return 1e-3 * std::max(1.0, r);
}

FdConnection connection_fd(const NahmData& nd, const Fiber& base, double h) {
  FdConnection out;
  out.h = h;
  const int N = base.dimension();
  for (int a = 0; a < 3; ++a) {
    Vec3 xp = base.x, xm = base.x;
    xp[a] += h;
    xm[a] -= h;
    Fiber fp = compute_fiber(nd, xp, base.grid), fm = compute_fiber(nd, xm, base.grid);
    out.w_plus[a] = polar_transport(base, fp);
    out.w_minus[a] = polar_transport(base, fm);
    CMat php = higgs(fp), phm = higgs(fm);
    out.dphi[a] = skew_part(CMat((out.w_plus[a].adjoint() * php * out.w_plus[a] -
                                  out.w_minus[a].adjoint() * phm * out.w_minus[a]) /
                                 (2 * h)));
    CMat op(N, N), om(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        op(i, j) = h0_inner(*base.grid, base.basis[i], fp.basis[j]);
        om(i, j) = h0_inner(*base.grid, base.basis[i], fm.basis[j]);
      }
    out.connection[a] = skew_part(CMat((op * out.w_plus[a] - om * out.w_minus[a]) / (2 * h)));
  }
  return out;
}

CMat curvature_fd(const NahmData& nd, const Fiber& base, int alpha, int beta, double h) {
  const int N = base.dimension();
  if (alpha == beta) return CMat::Zero(N, N);
  const int sgn[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  std::vector<Fiber> corner;
  for (const auto& s : sgn) {
    Vec3 p = base.x;
    p[alpha] += 0.5 * h * s[0];
    p[beta] += 0.5 * h * s[1];
    corner.push_back(compute_fiber(nd, p, base.grid));
  }
  CMat U = CMat::Identity(N, N);
  for (int k = 0; k < 4; ++k) U = polar_transport(corner[k], corner[(k + 1) % 4]) * U;
  CMat V = polar_transport(base, corner[0]);
  CMat Uc = V.adjoint() * U * V;
  CMat L = Uc.log();
  return skew_part(CMat(-L / (h * h)));
}

FieldSample sample_fields(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> g, double fd_step) {
  FieldSample s;
  s.x = x;
  const double h = fd_step > 0 ? fd_step : default_fd_step(x);
  Fiber F = compute_fiber(nd, x, g);
  s.fiber_gap = F.gap;
  s.phi = higgs(F);
  s.eigenvalues = higgs_eigenvalues(s.phi);
  GreenSolver G(nd, g, x);
  {
    double worst = 0;
    for (const auto& b : F.basis) {
      double r = 0;
      G.solve(b, &r);
      worst = std::max(worst, r);
    }
    s.green_residual = worst;
  }
  s.dphi = dphi_green(F, G);
  for (int c = 0; c < 3; ++c) s.curvature[c] = s.dphi[c];
  FdConnection fd = connection_fd(nd, F, h);
  s.connection = fd.connection;
  s.dphi_fd = fd.dphi;
  for (int c = 0; c < 3; ++c) s.curvature_fd[c] = curvature_fd(nd, F, (c + 1) % 3, (c + 2) % 3, h);
  double scale = 0, dm = 0;
  for (int c = 0; c < 3; ++c) {
    s.cross_f_fd = std::max(s.cross_f_fd, (s.curvature_fd[c] - s.dphi[c]).norm());
    s.cross_dphi_fd = std::max(s.cross_dphi_fd, (s.curvature[c] - s.dphi_fd[c]).norm());
    scale = std::max(scale, s.dphi[c].norm());
    dm = std::max(dm, (s.dphi_fd[c] - s.dphi[c]).norm());
  }
  s.dphi_mismatch = scale > 0 ? dm / scale : dm;
  s.bogomolny_residual = std::max(s.cross_f_fd, s.cross_dphi_fd);
  char buf[96];
  std::snprintf(buf, sizeof buf, "kernel-svd@(%.17g,%.17g,%.17g)", x[0], x[1], x[2]);
  s.frame_id = buf;
  return s;
}

FieldSample sample_fields(const NahmData& nd, const Vec3& x, const FieldOptions& opt) {
  return sample_fields(nd, x, std::make_shared<const FiberGrid>(make_grid(nd, opt.solver)), opt.fd_step);
}

double bogomolny_residual(const NahmData& nd, const Vec3& x, double h, const SolverOptions& opt) {
  FieldOptions fo;
  fo.solver = opt;
  fo.fd_step = h;
  return sample_fields(nd, x, fo).bogomolny_residual;
}

}  // namespace nahm
