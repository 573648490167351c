#include "nahm/sbtype.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nahm {

DerivedInvariants validate_type(const SymmetryBreakingType& t) {
  const int n = static_cast<int>(t.lambda.size());
  if (n == 0 || t.ranks.size() != t.lambda.size() || t.chern.size() != t.lambda.size())
    throw NahmError("Malformed", "lambda, ranks and chern must be nonempty lists of equal length");
  for (int a = 0; a < n; ++a) {
    if (t.ranks[a] <= 0) throw NahmError("Malformed", "rank r_" + std::to_string(a + 1) + " must be positive");
    if (static_cast<int>(t.chern[a].size()) != t.ranks[a])
      throw NahmError("Malformed", "chern tuple " + std::to_string(a + 1) + " has length != r_a");
  }
  for (int a = 0; a + 1 < n; ++a)
    if (!(t.lambda[a] < t.lambda[a + 1]))
      throw NahmError("NotSorted", "lambda must be strictly increasing at level " + std::to_string(a + 1));
  for (int a = 0; a < n; ++a)
    if (!std::is_sorted(t.chern[a].begin(), t.chern[a].end(), std::greater<int>()))
      throw NahmError("NotSorted", "chern tuple " + std::to_string(a + 1) + " is not sorted descending");

  double tr = 0, scale = 0;
  DerivedInvariants d;
  d.n = n;
  for (int a = 0; a < n; ++a) {
    tr += t.lambda[a] * t.ranks[a];
    scale += std::abs(t.lambda[a]) * t.ranks[a];
    d.N += t.ranks[a];
  }
  if (std::abs(tr) > 1e-12 * std::max(1.0, scale))
    throw NahmError("NotTraceFree", "sum lambda_a r_a = " + std::to_string(tr));

  int m = 0;
  d.levels.resize(n);
  for (int a = 0; a < n; ++a) {
    auto& L = d.levels[a];
    for (int k : t.chern[a]) {
      if (k > 0) {
        ++L.r_plus;
        L.k_plus += k;
        L.blocks_plus.push_back(k);
      } else if (k < 0) {
        ++L.r_minus;
        L.k_minus -= k;
        L.blocks_minus.push_back(-k);
      } else {
        ++L.r_zero;
      }
    }
    std::sort(L.blocks_minus.begin(), L.blocks_minus.end(), std::greater<int>());
    L.k = L.k_plus - L.k_minus;
    m += L.k;
    L.m = m;
  }
  if (d.levels[0].r_plus != t.ranks[0])
    throw NahmError("EndSignViolated", "first chern tuple must be all positive");
  if (d.levels[n - 1].r_minus != t.ranks[n - 1])
    throw NahmError("EndSignViolated", "last chern tuple must be all negative");
  if (d.levels[n - 1].m != 0)
    throw NahmError("NonzeroTerminal", "m_n = " + std::to_string(d.levels[n - 1].m));
  for (int a = 0; a + 1 < n; ++a) {
    int need = std::max(d.levels[a].r_zero + d.levels[a].k_plus, d.levels[a + 1].r_zero + d.levels[a + 1].k_minus);
    if (d.levels[a].m < need) {
      std::ostringstream os;
      os << "m_" << a + 1 << " = " << d.levels[a].m << " < " << need;
      throw NahmError("BoundViolated", os.str());
    }
  }
  return d;
}

namespace {

double orth_defect(const CMat& v) {
  if (v.cols() == 0) return 0.0;
  return max_abs(v.adjoint() * v - CMat::Identity(v.cols(), v.cols()));
}

}  // namespace

VerificationReport validate_framing(const SymmetryBreakingType& t, const Framing& f) {
  const DerivedInvariants d = validate_type(t);
  const int ni = d.intervals();
  VerificationReport rep;
  auto dims = [&](const std::string& name, const CMat& x, int r, int c) {
    bool ok = x.rows() == r && x.cols() == c;
    std::ostringstream os;
    os << "expected " << r << "x" << c << ", got " << x.rows() << "x" << x.cols();
    rep.add(name + ":DimensionMismatch", ok, ok ? 0.0 : 1.0, 0.0, os.str());
    return ok;
  };
  if (static_cast<int>(f.vplus.size()) != ni || static_cast<int>(f.vminus.size()) != ni ||
      static_cast<int>(f.cmap.size()) != d.n) {
    rep.add("framing:DimensionMismatch", false, 1.0, 0.0, "wrong number of framing entries");
    return rep;
  }
  for (int i = 0; i < ni; ++i) {
    const int m = d.m(i);
    const double tol = 1e-12 * std::max(1, m);
    std::string tag = std::to_string(i + 1);
    if (dims("V" + tag + "+", f.vplus[i], m, d.levels[i].k_plus)) {
      double e = orth_defect(f.vplus[i]);
      rep.add("V" + tag + "+:NotUnitary", e <= tol, e, tol);
    }
    if (dims("V" + tag + "-", f.vminus[i], m, d.levels[i + 1].k_minus)) {
      double e = orth_defect(f.vminus[i]);
      rep.add("V" + tag + "-:NotUnitary", e <= tol, e, tol);
    }
  }
  for (int a = 0; a < d.n; ++a) {
    std::string tag = "C" + std::to_string(a + 1);
    if (a == 0 || a == d.n - 1) {
      if (f.cmap[a].size() != 0) rep.add(tag + ":DimensionMismatch", false, 1.0, 0.0, "outer level carries a C map");
      continue;
    }
    const int mi = d.m(a), mo = d.m(a - 1);
    if (!dims(tag, f.cmap[a], mi, mo)) continue;
    if (f.vplus[a].cols() != d.levels[a].k_plus || f.vminus[a - 1].cols() != d.levels[a].k_minus) continue;
    const double tol = 1e-12 * std::max(1, mi);
    CMat pd = CMat::Identity(mo, mo) - projector(f.vminus[a - 1]);
    CMat pc = CMat::Identity(mi, mi) - projector(f.vplus[a]);
    const CMat& c = f.cmap[a];
    double e = std::max(max_abs(c.adjoint() * c - pd), max_abs(c * c.adjoint() - pc));
    rep.add(tag + ":NotUnitary", e <= tol, e, tol);
  }
  return rep;
}

void require_framing(const SymmetryBreakingType& t, const Framing& f) {
  auto rep = validate_framing(t, f);
  if (auto* c = rep.first_failure()) {
    auto pos = c->name.find(':');
    std::string code = pos == std::string::npos ? "DimensionMismatch" : c->name.substr(pos + 1);
    throw NahmError(code, c->name + " " + c->details);
  }
}

Framing coordinate_framing(const SymmetryBreakingType& t) {
  const DerivedInvariants d = validate_type(t);
  const int ni = d.intervals();
  Framing f;
  f.vplus.resize(ni);
  f.vminus.resize(ni);
  f.cmap.resize(d.n);
  for (int i = 0; i < ni; ++i) {
    const int m = d.m(i);
    f.vplus[i] = CMat::Identity(m, m).leftCols(d.levels[i].k_plus);
    f.vminus[i] = CMat::Identity(m, m).rightCols(d.levels[i + 1].k_minus);
  }
  for (int a = 1; a + 1 < d.n; ++a) {
    const int mi = d.m(a), mo = d.m(a - 1);
    const int c = mo - d.levels[a].k_minus;
    f.cmap[a] = CMat::Zero(mi, mo);
    f.cmap[a].block(mi - c, 0, c, c) = CMat::Identity(c, c);
  }
  return f;
}

Framing random_framing(const SymmetryBreakingType& t, std::uint64_t seed) {
  const DerivedInvariants d = validate_type(t);
  const int ni = d.intervals();
  std::mt19937_64 rng(seed);
  Framing f;
  f.vplus.resize(ni);
  f.vminus.resize(ni);
  f.cmap.resize(d.n);
  // A subspace that fills the whole space is given its coordinate basis.
  auto draw = [&](int m, int k) -> CMat {
    if (k == m) return CMat::Identity(m, m);
    return random_unitary(m, rng).leftCols(k);
  };
  for (int i = 0; i < ni; ++i) {
    const int m = d.m(i);
    f.vplus[i] = draw(m, d.levels[i].k_plus);
    f.vminus[i] = draw(m, d.levels[i + 1].k_minus);
  }
  for (int a = 1; a + 1 < d.n; ++a) {
    CMat qm = complement_basis(f.vminus[a - 1], d.m(a - 1));
    CMat qp = complement_basis(f.vplus[a], d.m(a));
    CMat w = random_unitary(static_cast<int>(qm.cols()), rng);
    f.cmap[a] = qp * w * qm.adjoint();
  }
  return f;
}

}  // namespace nahm
