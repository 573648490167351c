#include "nahm/chebyshev.hpp"
#include "nahm/io.hpp"
#include "nahm/nahm_core.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace nahm {

namespace {

LMat to_ld(const CMat& a) {
  LMat o(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) o(i, j) = lcd(a(i, j).real(), a(i, j).imag());
  return o;
}

void zero_t0(int m, CMat& T0) { T0.setZero(m, m); }

}  // namespace

Triple TField::residue(Side) const { return triple_zero(dim()); }

void TField::eval_ld(long double t, LTriple& T) const {
  Triple d;
  CMat t0;
  eval(static_cast<double>(t), d, t0);
  for (int a = 0; a < 3; ++a) T[a] = to_ld(d[a]);
}

// ---------------------------------------------------------------- Zero

void ZeroField::eval(double, Triple& T, CMat& T0) const {
  T = triple_zero(m_);
  zero_t0(m_, T0);
}

void ZeroField::deriv(double, Triple& dT, CMat& dT0) const {
  dT = triple_zero(m_);
  zero_t0(m_, dT0);
}

json ZeroField::describe() const { return {{"kind", "zero"}, {"m", m_}, {"lo", lo_}, {"hi", hi_}}; }

// ---------------------------------------------------------------- Const

ConstField::ConstField(Triple T, double lo, double hi) : T_(std::move(T)), lo_(lo), hi_(hi) {}

void ConstField::eval(double, Triple& T, CMat& T0) const {
  T = T_;
  zero_t0(dim(), T0);
}

void ConstField::deriv(double, Triple& dT, CMat& dT0) const {
  dT = triple_zero(dim());
  zero_t0(dim(), dT0);
}

void ConstField::eval_ld(long double, LTriple& T) const {
  for (int a = 0; a < 3; ++a) T[a] = to_ld(T_[a]);
}

json ConstField::describe() const {
  return {{"kind", "const"}, {"lo", lo_}, {"hi", hi_}, {"T", triple_to_json(T_)}};
}

// ---------------------------------------------------------------- Pole

PoleField::PoleField(Triple rho, double lo, double hi, Side side)
    : rho_(std::move(rho)), lo_(lo), hi_(hi), side_(side) {}

void PoleField::eval(double t, Triple& T, CMat& T0) const {
  const double f = side_ == Side::Left ? -1.0 / (t - lo_) : 1.0 / (hi_ - t);
  for (int a = 0; a < 3; ++a) T[a] = f * rho_[a];
  zero_t0(dim(), T0);
}

void PoleField::deriv(double t, Triple& dT, CMat& dT0) const {
  const double e = side_ == Side::Left ? t - lo_ : hi_ - t;
  const double f = 1.0 / (e * e);
  for (int a = 0; a < 3; ++a) dT[a] = f * rho_[a];
  zero_t0(dim(), dT0);
}

Triple PoleField::residue(Side s) const { return s == side_ ? rho_ : triple_zero(dim()); }

void PoleField::eval_ld(long double t, LTriple& T) const {
  const long double f = side_ == Side::Left ? -1.0L / (t - static_cast<long double>(lo_))
                                            : 1.0L / (static_cast<long double>(hi_) - t);
  for (int a = 0; a < 3; ++a) T[a] = to_ld(rho_[a]) * lcd(f, 0.0L);
}

json PoleField::describe() const {
  return {{"kind", "pole"},
          {"lo", lo_},
          {"hi", hi_},
          {"side", side_ == Side::Left ? "left" : "right"},
          {"rho", triple_to_json(rho_)}};
}

// ---------------------------------------------------------------- Sampled

SampledField::SampledField(double lo, double hi, std::vector<double> breaks, int degree,
                           const std::vector<std::vector<Triple>>& values, Triple res_lo, Triple res_hi)
    : m_(static_cast<int>(values.at(0).at(0)[0].rows())),
      deg_(degree),
      lo_(lo),
      hi_(hi),
      breaks_(std::move(breaks)),
      res_lo_(std::move(res_lo)),
      res_hi_(std::move(res_hi)) {
  s_ = lobatto_nodes(deg_);
  w_ = lobatto_bary(deg_);
  D_ = diff_matrix(s_, w_);
  const int np = static_cast<int>(breaks_.size()) - 1;
  smooth_.resize(np);
  dsmooth_.resize(np);
  for (int p = 0; p < np; ++p) {
    auto nodes = panel_nodes(p);
    smooth_[p].resize(deg_ + 1);
    dsmooth_[p].assign(deg_ + 1, triple_zero(m_));
    for (int j = 0; j <= deg_; ++j) {
      Triple S, dS;
      singular(nodes[j], S, dS);
      for (int a = 0; a < 3; ++a) smooth_[p][j][a] = values[p][j][a] - S[a];
    }
    const double sc = 2.0 / (breaks_[p + 1] - breaks_[p]);
    for (int j = 0; j <= deg_; ++j)
      for (int k = 0; k <= deg_; ++k)
        if (D_(j, k) != 0.0)
          for (int a = 0; a < 3; ++a) dsmooth_[p][j][a] += (sc * D_(j, k)) * smooth_[p][k][a];
  }
}

std::vector<double> SampledField::panel_nodes(int p) const {
  std::vector<double> out(deg_ + 1);
  const double a = breaks_[p], b = breaks_[p + 1];
  for (int j = 0; j <= deg_; ++j) out[j] = a + 0.5 * (b - a) * (s_(j) + 1.0);
  out[0] = a;
  out[deg_] = b;
  return out;
}

int SampledField::panel_of(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  int p = static_cast<int>(it - breaks_.begin()) - 1;
  return std::clamp(p, 0, static_cast<int>(breaks_.size()) - 2);
}

void SampledField::singular(double t, Triple& S, Triple& dS) const {
  const double el = t - lo_, er = hi_ - t;
  for (int a = 0; a < 3; ++a) {
    S[a] = -res_lo_[a] / el + res_hi_[a] / er;
    dS[a] = res_lo_[a] / (el * el) + res_hi_[a] / (er * er);
  }
}

void SampledField::eval(double t, Triple& T, CMat& T0) const {
  const int p = panel_of(t);
  const double a = breaks_[p], b = breaks_[p + 1];
  RVec r = bary_row(s_, w_, 2.0 * (t - a) / (b - a) - 1.0);
  Triple S, dS;
  singular(t, S, dS);
  for (int al = 0; al < 3; ++al) {
    T[al] = S[al];
    for (int j = 0; j <= deg_; ++j) T[al] += r(j) * smooth_[p][j][al];
  }
  zero_t0(m_, T0);
}

void SampledField::deriv(double t, Triple& dT, CMat& dT0) const {
  const int p = panel_of(t);
  const double a = breaks_[p], b = breaks_[p + 1];
  RVec r = bary_row(s_, w_, 2.0 * (t - a) / (b - a) - 1.0);
  Triple S, dS;
  singular(t, S, dS);
  for (int al = 0; al < 3; ++al) {
    dT[al] = dS[al];
    for (int j = 0; j <= deg_; ++j) dT[al] += r(j) * dsmooth_[p][j][al];
  }
  zero_t0(m_, dT0);
}

json SampledField::describe() const {
  json vals = json::array();
  for (int p = 0; p + 1 < static_cast<int>(breaks_.size()); ++p) {
    auto nodes = panel_nodes(p);
    json pv = json::array();
    for (int j = 0; j <= deg_; ++j) {
      Triple T;
      CMat T0;
      eval(nodes[j], T, T0);
      pv.push_back(triple_to_json(T));
    }
    vals.push_back(pv);
  }
  return {{"kind", "sampled"},
          {"lo", lo_},
          {"hi", hi_},
          {"breaks", breaks_},
          {"degree", deg_},
          {"residue_lo", triple_to_json(res_lo_)},
          {"residue_hi", triple_to_json(res_hi_)},
          {"values", vals}};
}

std::shared_ptr<SampledField> SampledField::from_json(const json& j) {
  std::vector<std::vector<Triple>> vals;
  for (const auto& pv : j.at("values")) {
    std::vector<Triple> row;
    for (const auto& tv : pv) row.push_back(triple_from_json(tv));
    vals.push_back(std::move(row));
  }
  return std::make_shared<SampledField>(j.at("lo").get<double>(), j.at("hi").get<double>(),
                                        j.at("breaks").get<std::vector<double>>(), j.at("degree").get<int>(), vals,
                                        triple_from_json(j.at("residue_lo")), triple_from_json(j.at("residue_hi")));
}

std::vector<double> graded_breaks(double lo, double hi, int per_half, double collar_rel) {
  const double L = hi - lo, e0 = collar_rel * L;
  const double ratio = std::pow(0.5 * L / e0, 1.0 / per_half);
  std::vector<double> left, out;
  for (int j = 0; j < per_half; ++j) left.push_back(e0 * std::pow(ratio, j));
  for (double e : left) out.push_back(lo + e);
  out.push_back(0.5 * (lo + hi));
  for (auto it = left.rbegin(); it != left.rend(); ++it) out.push_back(hi - *it);
  return out;
}

std::shared_ptr<SampledField> SampledField::resample(const TField& f, int panels_per_half, int degree,
                                                     double collar_rel) {
  if (!f.temporal()) throw NahmError("NotTemporal", "resampling requires temporal gauge");
  auto br = graded_breaks(f.lo(), f.hi(), panels_per_half, collar_rel);
  RVec s = lobatto_nodes(degree);
  std::vector<std::vector<Triple>> vals(br.size() - 1);
  for (size_t p = 0; p + 1 < br.size(); ++p) {
    vals[p].resize(degree + 1);
    for (int j = 0; j <= degree; ++j) {
      double t = (j == 0) ? br[p] : (j == degree ? br[p + 1] : br[p] + 0.5 * (br[p + 1] - br[p]) * (s(j) + 1.0));
      CMat T0;
      f.eval(t, vals[p][j], T0);
    }
  }
  return std::make_shared<SampledField>(f.lo(), f.hi(), br, degree, vals, f.residue(Side::Left),
                                        f.residue(Side::Right));
}

// ---------------------------------------------------------------- Perturbed

PerturbedField::PerturbedField(std::shared_ptr<const TField> base, Triple P, double delta)
    : base_(std::move(base)), P_(std::move(P)), delta_(delta) {}

void PerturbedField::eval(double t, Triple& T, CMat& T0) const {
  base_->eval(t, T, T0);
  for (int a = 0; a < 3; ++a) T[a] += delta_ * P_[a];
}

void PerturbedField::deriv(double t, Triple& dT, CMat& dT0) const { base_->deriv(t, dT, dT0); }

void PerturbedField::eval_ld(long double t, LTriple& T) const {
  base_->eval_ld(t, T);
  for (int a = 0; a < 3; ++a) T[a] += to_ld(P_[a]) * lcd(delta_, 0.0L);
}

json PerturbedField::describe() const {
  return {{"kind", "perturbed"}, {"base", base_->describe()}, {"P", triple_to_json(P_)}, {"delta", delta_}};
}

// ---------------------------------------------------------------- gauges

json ConstGauge::describe() const { return {{"kind", "const"}, {"g", cmat_to_json(u_)}}; }

void ExpPolyGauge::eval(double t, CMat& g, CMat& dg) const {
  const int m = dim();
  const double tau = t - tc_;
  CMat K = CMat::Zero(m, m), dK = CMat::Zero(m, m);
  double p = 1.0;
  for (size_t j = 0; j < K_.size(); ++j) {
    K += p * K_[j];
    if (j + 1 < K_.size()) dK += (static_cast<double>(j + 1) * p) * K_[j + 1];
    p *= tau;
  }
  CMat big = CMat::Zero(2 * m, 2 * m);
  big.topLeftCorner(m, m) = K;
  big.bottomRightCorner(m, m) = K;
  big.topRightCorner(m, m) = dK;
  CMat e = big.exp();
  g = e.topLeftCorner(m, m);
  dg = e.topRightCorner(m, m);
}

json ExpPolyGauge::describe() const {
  json ks = json::array();
  for (const auto& k : K_) ks.push_back(cmat_to_json(k));
  return {{"kind", "exp_poly"}, {"tc", tc_}, {"K", ks}};
}

SampledGauge::SampledGauge(std::vector<double> breaks, int degree, std::vector<std::vector<CMat>> g,
                           std::vector<std::vector<CMat>> dg)
    : breaks_(std::move(breaks)), deg_(degree), g_(std::move(g)), dg_(std::move(dg)) {
  s_ = lobatto_nodes(deg_);
  w_ = lobatto_bary(deg_);
}

void SampledGauge::eval(double t, CMat& g, CMat& dg) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  int p = std::clamp(static_cast<int>(it - breaks_.begin()) - 1, 0, static_cast<int>(breaks_.size()) - 2);
  const double a = breaks_[p], b = breaks_[p + 1];
  RVec r = bary_row(s_, w_, 2.0 * (t - a) / (b - a) - 1.0);
  g = CMat::Zero(dim(), dim());
  dg = CMat::Zero(dim(), dim());
  for (int j = 0; j <= deg_; ++j) {
    g += r(j) * g_[p][j];
    dg += r(j) * dg_[p][j];
  }
}

json SampledGauge::describe() const {
  auto dump = [](const std::vector<std::vector<CMat>>& v) {
    json out = json::array();
    for (const auto& row : v) {
      json r = json::array();
      for (const auto& x : row) r.push_back(cmat_to_json(x));
      out.push_back(r);
    }
    return out;
  };
  return {{"kind", "sampled"}, {"breaks", breaks_}, {"degree", deg_}, {"g", dump(g_)}, {"dg", dump(dg_)}};
}

// ---------------------------------------------------------------- Gauged

void GaugedField::eval(double t, Triple& T, CMat& T0) const {
  CMat g, dg;
  g_->eval(t, g, dg);
  CMat gi = g.inverse();
  Triple bT;
  CMat bT0;
  base_->eval(t, bT, bT0);
  for (int a = 0; a < 3; ++a) T[a] = g * bT[a] * gi;
  T0 = g * bT0 * gi - dg * gi;
}

void GaugedField::deriv(double t, Triple& dT, CMat& dT0) const {
  CMat g, dg;
  g_->eval(t, g, dg);
  CMat gi = g.inverse();
  Triple bT, bdT;
  CMat bT0, bdT0;
  base_->eval(t, bT, bT0);
  base_->deriv(t, bdT, bdT0);
  CMat u = dg * gi;
  for (int a = 0; a < 3; ++a) {
    CMat Tp = g * bT[a] * gi;
    dT[a] = g * bdT[a] * gi + u * Tp - Tp * u;
  }
  // The connection derivative is only used diagnostically; central difference.
  const double h = 1e-5 * (hi() - lo());
  Triple Ta, Tb;
  CMat A0, B0;
  eval(t + h, Ta, A0);
  eval(t - h, Tb, B0);
  dT0 = (A0 - B0) / (2 * h);
}

Triple GaugedField::residue(Side s) const {
  Triple r = base_->residue(s);
  CMat g, dg;
  g_->eval(s == Side::Left ? lo() : hi(), g, dg);
  CMat gi = g.inverse();
  for (int a = 0; a < 3; ++a) r[a] = g * r[a] * gi;
  return r;
}

json GaugedField::describe() const {
  return {{"kind", "gauged"}, {"base", base_->describe()}, {"gauge", g_->describe()}};
}

// ---------------------------------------------------------------- Rescaled

RescaledField::RescaledField(std::shared_ptr<const TField> base, double lo, double hi)
    : base_(std::move(base)), lo_(lo), hi_(hi), c_((base_->hi() - base_->lo()) / (hi - lo)) {}

void RescaledField::eval(double t, Triple& T, CMat& T0) const {
  base_->eval(map(t), T, T0);
  for (int a = 0; a < 3; ++a) T[a] *= c_;
  T0 *= c_;
}

void RescaledField::deriv(double t, Triple& dT, CMat& dT0) const {
  base_->deriv(map(t), dT, dT0);
  for (int a = 0; a < 3; ++a) dT[a] *= c_ * c_;
  dT0 *= c_ * c_;
}

void RescaledField::eval_ld(long double t, LTriple& T) const {
  long double tb = static_cast<long double>(base_->lo()) + (t - static_cast<long double>(lo_)) * c_;
  base_->eval_ld(tb, T);
  for (int a = 0; a < 3; ++a) T[a] *= lcd(c_, 0.0L);
}

json RescaledField::describe() const {
  return {{"kind", "rescaled"}, {"lo", lo_}, {"hi", hi_}, {"base", base_->describe()}};
}

}  // namespace nahm
