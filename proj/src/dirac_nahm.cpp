#include "nahm/dirac_nahm.hpp"

#include "nahm/chebyshev.hpp"
#include "nahm/dop853.hpp"
#include "nahm/kernels.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace nahm {

namespace {

bool is_singular(const Triple& r) { return triple_max_abs(r) > 1e-14; }

CMat thin_q(const Eigen::HouseholderQR<CMat>& qr, Eigen::Index rows, Eigen::Index cols) {
  return qr.householderQ() * CMat::Identity(rows, cols);
}

CMat higgs_part(const Triple& T, const Vec3& x, cd coef_T) {
  const int m = static_cast<int>(T[0].rows());
  CMat Q = CMat::Zero(2 * m, 2 * m);
  for (int a = 0; a < 3; ++a) Q += kron(coef_T * T[a] + x[a] * CMat::Identity(m, m), sigma()[a]);
  return Q;
}

}  // namespace

ExponentTable local_exponents(const Triple& residue) {
  const int m = static_cast<int>(residue[0].rows());
  CMat B = CMat::Zero(2 * m, 2 * m);
  for (int a = 0; a < 3; ++a) B -= kron(residue[a], sigma()[a]);
  Eigen::SelfAdjointEigenSolver<CMat> es(herm_part(B));
  ExponentTable out;
  out.vectors = es.eigenvectors();
  for (int j = 0; j < 2 * m; ++j) {
    // exponents are half-integers; snap away rounding
    double v = std::round(2.0 * es.eigenvalues()(j)) / 2.0;
    out.nu.push_back(v);
    out.admissible.push_back(v > -0.5);
    if (v > -0.5) ++out.admissible_count;
  }
  return out;
}

double IntervalGrid::t_of(const Panel& p, double z) const {
  switch (p.map) {
    case Map::LogLeft: return lo + std::exp(p.c + p.h * z);
    case Map::LogRight: return hi - std::exp(p.c - p.h * z);
    default: return p.c + p.h * z;
  }
}

double IntervalGrid::tz_of(const Panel& p, double z) const {
  switch (p.map) {
    case Map::LogLeft: return p.h * std::exp(p.c + p.h * z);
    case Map::LogRight: return p.h * std::exp(p.c - p.h * z);
    default: return p.h;
  }
}

double IntervalGrid::tzz_of(const Panel& p, double z) const {
  switch (p.map) {
    case Map::LogLeft: return p.h * p.h * std::exp(p.c + p.h * z);
    case Map::LogRight: return -p.h * p.h * std::exp(p.c - p.h * z);
    default: return 0.0;
  }
}

FiberGrid make_grid(const NahmData& nd, const SolverOptions& opt) {
  FiberGrid g;
  g.opt = opt;
  const RVec s = lobatto_nodes(opt.degree);
  const RVec cw = clenshaw_curtis(opt.degree);
  for (int i = 0; i < nd.n_intervals(); ++i) {
    const auto& I = nd.intervals[i];
    IntervalGrid G;
    G.lo = I.lo;
    G.hi = I.hi;
    G.mid = 0.5 * (I.lo + I.hi);
    G.m = I.m;
    G.deg = opt.degree;
    const double L = I.hi - I.lo;
    const double eps_init = opt.init_rel * L, eps0 = opt.collar_rel * L;
    for (int sd = 0; sd < 2; ++sd) {
      Triple r = I.field->residue(static_cast<Side>(sd));
      G.sing[sd] = is_singular(r);
      if (G.sing[sd]) G.exps[sd] = local_exponents(r);
    }

    std::vector<IntervalGrid::Panel> panels;
    const double l0 = std::log(eps_init), l1 = std::log(eps0);
    const double dl = (l1 - l0) / opt.log_panels;
    if (G.sing[0])
      for (int k = 0; k < opt.log_panels; ++k) {
        IntervalGrid::Panel p;
        p.map = IntervalGrid::Map::LogLeft;
        p.c = l0 + (k + 0.5) * dl;
        p.h = 0.5 * dl;
        panels.push_back(p);
      }
    std::vector<double> br = graded_breaks(I.lo, I.hi, opt.panels_per_half, opt.collar_rel);
    if (!G.sing[0]) br.front() = I.lo;
    if (!G.sing[1]) br.back() = I.hi;
    for (size_t k = 0; k + 1 < br.size(); ++k) {
      IntervalGrid::Panel p;
      p.c = 0.5 * (br[k] + br[k + 1]);
      p.h = 0.5 * (br[k + 1] - br[k]);
      panels.push_back(p);
    }
    if (G.sing[1])
      for (int k = opt.log_panels - 1; k >= 0; --k) {
        IntervalGrid::Panel p;
        p.map = IntervalGrid::Map::LogRight;
        p.c = l0 + (k + 0.5) * dl;
        p.h = 0.5 * dl;
        panels.push_back(p);
      }

    for (size_t pi = 0; pi < panels.size(); ++pi) {
      auto& p = panels[pi];
      p.first = static_cast<int>(pi) * opt.degree;
      for (int j = 0; j <= opt.degree; ++j) {
        const double z = s(j);
        const double t = G.t_of(p, z), tz = G.tz_of(p, z), tzz = G.tzz_of(p, z);
        if (j == 0 && pi > 0) {
          G.w.back() += cw(j) * tz;
          G.tz_right.back() = tz;
          G.tzz_right.back() = tzz;
          continue;
        }
        G.t.push_back(t);
        G.w.push_back(cw(j) * tz);
        G.tz.push_back(tz);
        G.tzz.push_back(tzz);
        G.tz_right.push_back(tz);
        G.tzz_right.push_back(tzz);
      }
    }
    // exact ends and midpoint
    if (!G.sing[0]) G.t.front() = I.lo;
    if (!G.sing[1]) G.t.back() = I.hi;
    int best = 0;
    for (int j = 0; j < G.nodes(); ++j)
      if (std::abs(G.t[j] - G.mid) < std::abs(G.t[best] - G.mid)) best = j;
    G.mid_index = best;
    G.t[best] = G.mid;
    G.panels = std::move(panels);

    for (int sd = 0; sd < 2; ++sd) {
      G.tail[sd] = CMat::Zero(2 * G.m, 2 * G.m);
      if (!G.sing[sd]) continue;
      const auto& E = G.exps[sd];
      for (int j = 0; j < 2 * G.m; ++j)
        if (E.admissible[j])
          G.tail[sd] += (eps_init / (2.0 * E.nu[j] + 1.0)) * E.vectors.col(j) * E.vectors.col(j).adjoint();
    }
    g.iv.push_back(std::move(G));
  }
  return g;
}

SpinorFunction zero_spinor(const FiberGrid& g) {
  SpinorFunction z;
  for (const auto& G : g.iv) z.v.push_back(CMat::Zero(2 * G.m, G.nodes()));
  return z;
}

CMat cokernel_matrix(const TField& f, double t, const Vec3& x) {
  Triple T;
  CMat T0;
  f.eval(t, T, T0);
  const int m = f.dim();
  CMat A = -kron(T0, CMat::Identity(2, 2));
  for (int a = 0; a < 3; ++a) A += kron(T[a] - I1 * x[a] * CMat::Identity(m, m), sigma()[a]);
  return A;
}

CMat ShootingBasis::end_to_mid(const CMat& c) const {
  CMat out = c;
  for (size_t j = 1; j < R.size(); ++j) out = R[j] * out;
  return out;
}

void ShootingBasis::fill(const CVec& d, CMat& values) const {
  CVec c = d;
  values.col(node.back()) = Q.back() * c;
  for (size_t j = R.size() - 1; j >= 1; --j) {
    c = R[j].triangularView<Eigen::Upper>().solve(c);
    values.col(node[j - 1]) = Q[j - 1] * c;
  }
}

ShootingBasis shoot_solutions(const NahmData& nd, const FiberGrid& g, const Vec3& x, int interval, Side end) {
  const IntervalGrid& G = g.iv[interval];
  const TField& f = *nd.intervals[interval].field;
  const int dim = 2 * G.m;
  const SolverOptions& opt = g.opt;
  const RVec zs = lobatto_nodes(G.deg);

  ShootingBasis B;
  B.interval = interval;
  B.end = end;
  const int sd = static_cast<int>(end);
  const int n = G.nodes();
  if (end == Side::Left)
    for (int j = 0; j <= G.mid_index; ++j) B.node.push_back(j);
  else
    for (int j = n - 1; j >= G.mid_index; --j) B.node.push_back(j);

  CMat Y;
  if (G.sing[sd]) {
    const auto& E = G.exps[sd];
    Y.resize(dim, E.admissible_count);
    int c = 0;
    for (int j = 0; j < dim; ++j)
      if (E.admissible[j]) Y.col(c++) = E.vectors.col(j);
  } else {
    Y = CMat::Identity(dim, dim);
  }
  B.Q.push_back(Y);
  B.R.push_back(CMat());

  for (size_t k = 1; k < B.node.size(); ++k) {
    const int ja = B.node[k - 1], jb = B.node[k];
    const int lowj = std::min(ja, jb);
    const auto& P = G.panels[std::min<size_t>(lowj / G.deg, G.panels.size() - 1)];
    const double za = zs(ja - P.first), zb = zs(jb - P.first);
    auto rhs = [&](double z, const CMat& y) -> CMat {
      return G.tz_of(P, z) * (cokernel_matrix(f, G.t_of(P, z), x) * y);
    };
    double scale = 0;
    for (double z : {za, zb}) scale = std::max(scale, (G.tz_of(P, z) * cokernel_matrix(f, G.t_of(P, z), x)).norm());
    int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(zb - za) * scale / opt.step_scale)));
    CMat Yn;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 12) throw NahmError("StepFailure", "spinor march did not meet the step tolerance");
      const double h = (zb - za) / nsub;
      Yn = B.Q.back();
      double worst = 0;
      for (int s = 0; s < nsub; ++s) {
        double err = 0;
        Yn = dop853::step(rhs, za + s * h, h, Yn, &err, opt.step_tol, opt.step_tol);
        worst = std::max(worst, err);
      }
      if (worst <= 1.0 && Yn.allFinite()) break;
      nsub *= 2;
    }
    Eigen::HouseholderQR<CMat> qr(Yn);
    B.Q.push_back(thin_q(qr, dim, Yn.cols()));
    B.R.push_back(qr.matrixQR().topRows(Yn.cols()).triangularView<Eigen::Upper>());
  }
  return B;
}

int MatchingSystem::index() const {
  int u = 0, v = 0;
  for (int d : dim_u) u += d;
  for (int d : dim_v) v += d;
  return u - v;
}

MatchingSystem assemble_matching(const NahmData& nd, const FiberGrid& g, const Vec3& x) {
  MatchingSystem M;
  const int ni = nd.n_intervals(), nl = nd.inv.n;
  for (int i = 0; i < ni; ++i) {
    M.left.push_back(shoot_solutions(nd, g, x, i, Side::Left));
    M.right.push_back(shoot_solutions(nd, g, x, i, Side::Right));
    M.dim_v.push_back(2 * g.iv[i].m);
  }
  M.to_right_half_of_prev.assign(nl, CMat());
  M.to_left_half_of_next.assign(nl, CMat());
  for (int a = 0; a < nl; ++a) {
    M.dim_u_expected.push_back(nd.inv.m(a - 1) + nd.inv.m(a) + nd.type.ranks[a]);
    if (a == 0) {
      const int p = M.left[0].columns();
      M.to_left_half_of_next[a] = CMat::Identity(p, p);
      M.dim_u.push_back(p);
      continue;
    }
    if (a == nl - 1) {
      const int p = M.right[ni - 1].columns();
      M.to_right_half_of_prev[a] = CMat::Identity(p, p);
      M.dim_u.push_back(p);
      continue;
    }
    const ShootingBasis& LB = M.left[a];
    const ShootingBasis& RB = M.right[a - 1];
    const int pl = LB.columns(), pr = RB.columns();
    const CMat& Zp = nd.xyz(a, Side::Left).Z;
    CMat C2 = kron(nd.framing.cmap[a], CMat::Identity(2, 2));
    CMat K(Zp.cols(), pl + pr);
    K << Zp.adjoint() * LB.at_end(), -(Zp.adjoint() * C2 * RB.at_end());
    CMat N;
    if (K.rows() == 0) {
      N = CMat::Identity(pl + pr, pl + pr);
    } else {
      Eigen::JacobiSVD<CMat> svd(K, Eigen::ComputeFullV);
      const RVec& sv = svd.singularValues();
      int rank = 0;
      for (int j = 0; j < sv.size(); ++j)
        if (sv(j) > 1e-10 * std::max(1.0, sv(0))) ++rank;
      N = svd.matrixV().rightCols(pl + pr - rank);
    }
    CMat S(pl + pr, N.cols());
    S << LB.end_to_mid(N.topRows(pl)), RB.end_to_mid(N.bottomRows(pr));
    Eigen::HouseholderQR<CMat> qr(S);
    CMat Qs = thin_q(qr, S.rows(), S.cols());
    M.to_left_half_of_next[a] = Qs.topRows(pl);
    M.to_right_half_of_prev[a] = Qs.bottomRows(pr);
    M.dim_u.push_back(static_cast<int>(N.cols()));
  }
  int cols = 0, rows = 0;
  for (int a = 0; a < nl; ++a) {
    M.col0.push_back(cols);
    cols += M.dim_u[a];
  }
  for (int i = 0; i < ni; ++i) {
    M.row0.push_back(rows);
    rows += M.dim_v[i];
  }
  M.D = CMat::Zero(rows, cols);
  for (int i = 0; i < ni; ++i) {
    // level i sits at the left end of interval i, level i+1 at its right end
    M.D.block(M.row0[i], M.col0[i], M.dim_v[i], M.dim_u[i]) = M.left[i].at_mid() * M.to_left_half_of_next[i];
    M.D.block(M.row0[i], M.col0[i + 1], M.dim_v[i], M.dim_u[i + 1]) =
        -(M.right[i].at_mid() * M.to_right_half_of_prev[i + 1]);
  }
  return M;
}

cd h0_inner_weighted(const FiberGrid& g, const SpinorFunction& psi, const SpinorFunction& phi, bool times_t) {
  cd acc = 0;
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const IntervalGrid& G = g.iv[i];
    if (G.m == 0) continue;
    std::vector<double> w = G.w;
    if (times_t)
      for (int j = 0; j < G.nodes(); ++j) w[j] *= G.t[j];
    acc += kernels::wdot(w.data(), psi.v[i].data(), phi.v[i].data(), static_cast<size_t>(G.nodes()),
                         static_cast<size_t>(2 * G.m));
    for (int sd = 0; sd < 2; ++sd) {
      if (!G.sing[sd]) continue;
      const int j = sd == 0 ? 0 : G.nodes() - 1;
      const double f = times_t ? (sd == 0 ? G.lo : G.hi) : 1.0;
      acc += f * psi.v[i].col(j).dot(G.tail[sd] * phi.v[i].col(j));
    }
  }
  return acc;
}

cd h0_inner(const FiberGrid& g, const SpinorFunction& psi, const SpinorFunction& phi) {
  return h0_inner_weighted(g, psi, phi, false);
}

SpinorFunction derivative(const FiberGrid& g, const SpinorFunction& psi) {
  SpinorFunction out;
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const IntervalGrid& G = g.iv[i];
    const RMat Dz = diff_matrix(lobatto_nodes(G.deg), lobatto_bary(G.deg));
    CMat d = CMat::Zero(psi.v[i].rows(), G.nodes());
    std::vector<int> hits(G.nodes(), 0);
    for (const auto& P : G.panels) {
      CMat blk = psi.v[i].middleCols(P.first, G.deg + 1) * Dz.transpose().cast<cd>();
      for (int j = 0; j <= G.deg; ++j) {
        const int n = P.first + j;
        const double tz = (j == 0) ? G.tz_right[n] : G.tz[n];
        d.col(n) += blk.col(j) / tz;
        ++hits[n];
      }
    }
    for (int n = 0; n < G.nodes(); ++n) d.col(n) /= static_cast<double>(hits[n]);
    out.v.push_back(std::move(d));
  }
  return out;
}

SpinorFunction apply_dirac(const NahmData& nd, const FiberGrid& g, const Vec3& x, const SpinorFunction& psi,
                           bool adjoint) {
  SpinorFunction d = derivative(g, psi);
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const IntervalGrid& G = g.iv[i];
    const TField& f = *nd.intervals[i].field;
    for (int j = 0; j < G.nodes(); ++j) {
      Triple T;
      CMat T0;
      f.eval(G.t[j], T, T0);
      CMat Q = higgs_part(T, x, I1);
      CVec v = psi.v[i].col(j);
      CVec r = I1 * (d.v[i].col(j) + kron(T0, CMat::Identity(2, 2)) * v);
      r += adjoint ? CVec(-(Q * v)) : CVec(Q * v);
      d.v[i].col(j) = r;
    }
  }
  return d;
}

VerificationReport check_boundary_conditions(const NahmData& nd, const FiberGrid&, const SpinorFunction& psi,
                                             BcMode mode, double tol) {
  VerificationReport rep;
  double sup = 0;
  for (const auto& v : psi.v)
    for (int j = 0; j < v.cols(); ++j) sup = std::max(sup, v.col(j).norm());
  if (sup == 0) sup = 1;
  const int ni = nd.n_intervals(), nl = nd.inv.n;
  for (int a = 0; a < nl; ++a) {
    const std::string tag = "bc[" + std::to_string(a + 1);
    const bool has_prev = a > 0, has_next = a < ni;
    CVec vl, vr;
    if (has_prev) vl = psi.v[a - 1].col(psi.v[a - 1].cols() - 1);
    if (has_next) vr = psi.v[a].col(0);
    if (mode == BcMode::H1) {
      if (has_next) {
        const auto& S = nd.xyz(a, Side::Left);
        double e = std::sqrt((S.X.adjoint() * vr).squaredNorm() + (S.Y.adjoint() * vr).squaredNorm()) / sup;
        rep.bound(tag + "+]:X+Y", e, tol, "X and Y components at the left end of the interval, relative to sup");
      }
      if (has_prev) {
        const auto& S = nd.xyz(a - 1, Side::Right);
        double e = std::sqrt((S.X.adjoint() * vl).squaredNorm() + (S.Y.adjoint() * vl).squaredNorm()) / sup;
        rep.bound(tag + "-]:X+Y", e, tol, "X and Y components at the right end of the interval, relative to sup");
      }
      if (has_prev && has_next) {
        const auto& Sp = nd.xyz(a, Side::Left);
        const auto& Sm = nd.xyz(a - 1, Side::Right);
        CMat Mz = Sp.Z.adjoint() * kron(nd.framing.cmap[a], CMat::Identity(2, 2)) * Sm.Z;
        double e = (Sp.Z.adjoint() * vr - Mz * (Sm.Z.adjoint() * vl)).norm() / sup;
        rep.bound(tag + "]:Z", e, tol, "Z components matched through the framing map");
      }
    } else if (has_prev && has_next) {
      const auto& Sp = nd.xyz(a, Side::Left);
      CMat C2 = kron(nd.framing.cmap[a], CMat::Identity(2, 2));
      double e = (Sp.Z.adjoint() * (vr - C2 * vl)).norm() / sup;
      rep.bound(tag + "]:cokernel", e, tol, "Z+ projection of the jump across the level");
    }
  }
  return rep;
}

double h1_norm(const FiberGrid& g, const SpinorFunction& psi) {
  SpinorFunction d = derivative(g, psi);
  double s = h0_inner(g, psi, psi).real();
  for (size_t i = 0; i < g.iv.size(); ++i) {
    const IntervalGrid& G = g.iv[i];
    if (G.m == 0) continue;
    s += kernels::wdot(G.w.data(), d.v[i].data(), d.v[i].data(), static_cast<size_t>(G.nodes()),
                       static_cast<size_t>(2 * G.m))
             .real();
  }
  return std::sqrt(std::max(0.0, s));
}

SpinorFunction apply_sigma(const SpinorFunction& psi, int alpha) {
  SpinorFunction out = psi;
  const CMat& s = sigma()[alpha];
  for (auto& v : out.v)
    for (Eigen::Index r = 0; r + 1 < v.rows(); r += 2) {
      Eigen::Matrix<cd, 2, Eigen::Dynamic> blk = v.middleRows(r, 2);
      v.middleRows(r, 2) = s * blk;
    }
  return out;
}

Fiber compute_fiber(const NahmData& nd, const Vec3& x, std::shared_ptr<const FiberGrid> gp) {
  const FiberGrid& g = *gp;
  MatchingSystem M = assemble_matching(nd, g, x);
  Fiber F;
  F.x = x;
  F.grid = gp;
  F.dim_u = M.dim_u;
  F.dim_v = M.dim_v;
  for (size_t a = 0; a < M.dim_u.size(); ++a)
    if (M.dim_u[a] != M.dim_u_expected[a])
      throw NahmError("CountMismatch", "level " + std::to_string(a + 1) + ": " + std::to_string(M.dim_u[a]) +
                                           " admissible solutions, expected " +
                                           std::to_string(M.dim_u_expected[a]));
  const int rows = static_cast<int>(M.D.rows()), cols = static_cast<int>(M.D.cols());
  const int N = nd.inv.N;
  Eigen::JacobiSVD<CMat> svd(M.D, Eigen::ComputeFullV);
  F.singular_values = svd.singularValues();
  const RVec& sv = F.singular_values;
  const double smax = sv.size() ? sv(0) : 1.0;
  int rank = 0;
  for (int j = 0; j < sv.size(); ++j)
    if (sv(j) > g.opt.svd_rel * smax) ++rank;
  F.rank_deficit = rows - rank;
  CMat K = svd.matrixV().rightCols(cols - rank);
  if (F.rank_deficit > 0)
    throw NahmError("SurjectivityFailure", "matching map has rank " + std::to_string(rank) + " < " +
                                               std::to_string(rows));
  if (K.cols() != N)
    throw NahmError("WrongFiberDimension",
                    "kernel dimension " + std::to_string(K.cols()) + ", expected " + std::to_string(N));
  double res = 0;
  for (int c = 0; c < K.cols(); ++c) res = std::max(res, (M.D * K.col(c)).norm());
  const double smin = rank > 0 ? sv(rank - 1) : smax;
  F.gap = smin / std::max(res, 1e-16 * smax);
  if (F.gap < g.opt.min_gap)
    throw NahmError("WrongFiberDimension", "spectral gap " + std::to_string(F.gap) + " below threshold");

  const int ni = nd.n_intervals();
  std::vector<SpinorFunction> raw;
  for (int c = 0; c < N; ++c) {
    SpinorFunction s = zero_spinor(g);
    for (int i = 0; i < ni; ++i) {
      if (g.iv[i].m == 0) continue;
      CVec dl = M.to_left_half_of_next[i] * K.col(c).segment(M.col0[i], M.dim_u[i]);
      CVec dr = M.to_right_half_of_prev[i + 1] * K.col(c).segment(M.col0[i + 1], M.dim_u[i + 1]);
      M.left[i].fill(dl, s.v[i]);
      CVec at_mid = s.v[i].col(g.iv[i].mid_index);
      M.right[i].fill(dr, s.v[i]);
      s.v[i].col(g.iv[i].mid_index) = 0.5 * (at_mid + s.v[i].col(g.iv[i].mid_index));
    }
    raw.push_back(std::move(s));
  }
  CMat G(N, N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) G(a, b) = h0_inner(g, raw[a], raw[b]);
  CMat W = inv_sqrt_herm(herm_part(G));
  for (int b = 0; b < N; ++b) {
    SpinorFunction s = zero_spinor(g);
    for (int a = 0; a < N; ++a)
      for (int i = 0; i < ni; ++i) s.v[i] += W(a, b) * raw[a].v[i];
    F.basis.push_back(std::move(s));
  }
  double gr = 0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      gr = std::max(gr, std::abs(h0_inner(g, F.basis[a], F.basis[b]) - (a == b ? 1.0 : 0.0)));
  F.gram_residual = gr;
  return F;
}

Fiber compute_fiber(const NahmData& nd, const Vec3& x, const SolverOptions& opt) {
  return compute_fiber(nd, x, std::make_shared<const FiberGrid>(make_grid(nd, opt)));
}

json fiber_report(const Fiber& f) {
  json j;
  j["x"] = {f.x[0], f.x[1], f.x[2]};
  j["dimension"] = f.dimension();
  j["dim_u"] = f.dim_u;
  j["dim_v"] = f.dim_v;
  std::vector<double> sv(f.singular_values.data(), f.singular_values.data() + f.singular_values.size());
  j["singular_values"] = sv;
  j["gap"] = f.gap;
  j["gram_residual"] = f.gram_residual;
  return j;
}

}  // namespace nahm
