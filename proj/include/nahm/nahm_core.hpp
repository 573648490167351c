#pragma once

#include "nahm/linalg.hpp"
#include "nahm/report.hpp"
#include "nahm/sbtype.hpp"

#include <json.hpp>

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace nahm {

using json = nlohmann::json;
using lcd = std::complex<long double>;
using LMat = Eigen::Matrix<lcd, Eigen::Dynamic, Eigen::Dynamic>;
using LTriple = std::array<LMat, 3>;

enum class Side { Left = 0, Right = 1 };

// Nahm matrices on one interval [lo, hi]: T_alpha(t) skew-Hermitian and the
// connection component T_0(t). Poles are encoded as T ~ -rho/(t-lo) on the left
// and +rho/(hi-t) on the right with [rho_2, rho_3] = rho_1.
class TField {
 public:
  virtual ~TField() = default;
  virtual int dim() const = 0;
  virtual double lo() const = 0;
  virtual double hi() const = 0;
  virtual void eval(double t, Triple& T, CMat& T0) const = 0;
  virtual void deriv(double t, Triple& dT, CMat& dT0) const = 0;
  virtual bool temporal() const { return true; }
  // Full m x m residue at an end (zero if the end is regular).
  virtual Triple residue(Side s) const;
  virtual void eval_ld(long double t, LTriple& T) const;
  virtual json describe() const = 0;
};

using FieldPtr = std::shared_ptr<const TField>;

class ZeroField final : public TField {
 public:
  ZeroField(int m, double lo, double hi) : m_(m), lo_(lo), hi_(hi) {}
  int dim() const override { return m_; }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  json describe() const override;

 private:
  int m_;
  double lo_, hi_;
};

class ConstField final : public TField {
 public:
  ConstField(Triple T, double lo, double hi);
  int dim() const override { return static_cast<int>(T_[0].rows()); }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  void eval_ld(long double t, LTriple& T) const override;
  json describe() const override;
  const Triple& value() const { return T_; }

 private:
  Triple T_;
  double lo_, hi_;
};

class PoleField final : public TField {
 public:
  PoleField(Triple rho, double lo, double hi, Side side);
  int dim() const override { return static_cast<int>(rho_[0].rows()); }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  Triple residue(Side s) const override;
  void eval_ld(long double t, LTriple& T) const override;
  json describe() const override;

 private:
  Triple rho_;
  double lo_, hi_;
  Side side_;
};

// Piecewise Chebyshev (Lobatto, barycentric) representation of the smooth
// part on panels covering [breaks.front(), breaks.back()], plus exact pole terms.
// Evaluation outside the panels extrapolates the outermost panel.
class SampledField final : public TField {
 public:
  // values[p][j] holds the full T at node j of panel p; residues are subtracted.
  SampledField(double lo, double hi, std::vector<double> breaks, int degree,
               const std::vector<std::vector<Triple>>& values, Triple res_lo, Triple res_hi);
  int dim() const override { return m_; }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  Triple residue(Side s) const override { return s == Side::Left ? res_lo_ : res_hi_; }
  json describe() const override;

  const std::vector<double>& breaks() const { return breaks_; }
  int degree() const { return deg_; }
  // Node positions of panel p.
  std::vector<double> panel_nodes(int p) const;
  static std::shared_ptr<SampledField> from_json(const json& j);
  // Samples f on a graded panel grid over [lo+eps0, hi-eps0].
  static std::shared_ptr<SampledField> resample(const TField& f, int panels_per_half, int degree,
                                                double collar_rel);

 private:
  int panel_of(double t) const;
  void singular(double t, Triple& S, Triple& dS) const;
  int m_, deg_;
  double lo_, hi_;
  std::vector<double> breaks_;
  RVec s_, w_;
  RMat D_;
  std::vector<std::vector<Triple>> smooth_, dsmooth_;
  Triple res_lo_, res_hi_;
};

// T + delta * P with constant skew-Hermitian P (not a solution; used for sensitivity tests).
class PerturbedField final : public TField {
 public:
  PerturbedField(std::shared_ptr<const TField> base, Triple P, double delta);
  int dim() const override { return base_->dim(); }
  double lo() const override { return base_->lo(); }
  double hi() const override { return base_->hi(); }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  bool temporal() const override { return base_->temporal(); }
  Triple residue(Side s) const override { return base_->residue(s); }
  void eval_ld(long double t, LTriple& T) const override;
  json describe() const override;

 private:
  std::shared_ptr<const TField> base_;
  Triple P_;
  double delta_;
};

// Unitary-valued gauge function g(t) with derivative.
class GaugeFn {
 public:
  virtual ~GaugeFn() = default;
  virtual int dim() const = 0;
  virtual void eval(double t, CMat& g, CMat& dg) const = 0;
  virtual json describe() const = 0;
};
using GaugePtr = std::shared_ptr<const GaugeFn>;

class ConstGauge final : public GaugeFn {
 public:
  explicit ConstGauge(CMat u) : u_(std::move(u)) {}
  int dim() const override { return static_cast<int>(u_.rows()); }
  void eval(double, CMat& g, CMat& dg) const override {
    g = u_;
    dg = CMat::Zero(u_.rows(), u_.cols());
  }
  json describe() const override;

 private:
  CMat u_;
};

// g(t) = exp(sum_j K_j (t - t_c)^j) with skew-Hermitian K_j.
class ExpPolyGauge final : public GaugeFn {
 public:
  ExpPolyGauge(std::vector<CMat> K, double tc) : K_(std::move(K)), tc_(tc) {}
  int dim() const override { return static_cast<int>(K_.at(0).rows()); }
  void eval(double t, CMat& g, CMat& dg) const override;
  json describe() const override;

 private:
  std::vector<CMat> K_;
  double tc_;
};

// Piecewise Chebyshev samples of g and dg.
class SampledGauge final : public GaugeFn {
 public:
  SampledGauge(std::vector<double> breaks, int degree, std::vector<std::vector<CMat>> g,
               std::vector<std::vector<CMat>> dg);
  int dim() const override { return static_cast<int>(g_.at(0).at(0).rows()); }
  void eval(double t, CMat& g, CMat& dg) const override;
  json describe() const override;

 private:
  std::vector<double> breaks_;
  int deg_;
  RVec s_, w_;
  std::vector<std::vector<CMat>> g_, dg_;
};

// T' = g T g^-1, T0' = g T0 g^-1 - dg g^-1.
class GaugedField final : public TField {
 public:
  GaugedField(std::shared_ptr<const TField> base, GaugePtr g) : base_(std::move(base)), g_(std::move(g)) {}
  int dim() const override { return base_->dim(); }
  double lo() const override { return base_->lo(); }
  double hi() const override { return base_->hi(); }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  bool temporal() const override { return false; }
  Triple residue(Side s) const override;
  json describe() const override;

 private:
  std::shared_ptr<const TField> base_;
  GaugePtr g_;
};

// T'(t') = c T(f(t')) with f affine from [lo', hi'] onto the base interval and c = f'.
class RescaledField final : public TField {
 public:
  RescaledField(std::shared_ptr<const TField> base, double lo, double hi);
  int dim() const override { return base_->dim(); }
  double lo() const override { return lo_; }
  double hi() const override { return hi_; }
  void eval(double t, Triple& T, CMat& T0) const override;
  void deriv(double t, Triple& dT, CMat& dT0) const override;
  bool temporal() const override { return base_->temporal(); }
  Triple residue(Side s) const override { return base_->residue(s); }
  void eval_ld(long double t, LTriple& T) const override;
  json describe() const override;

 private:
  double map(double t) const { return base_->lo() + (t - lo_) * c_; }
  std::shared_ptr<const TField> base_;
  double lo_, hi_, c_;
};

struct NahmInterval {
  int index = 0;
  double lo = 0, hi = 0;
  int m = 0;
  FieldPtr field;
};

struct SubspaceTriple {
  CMat X, Y, Z;  // orthonormal bases in C^{2m}
};

struct PoleStructure {
  Side side = Side::Left;
  std::vector<int> rep_blocks;
  CMat basis;   // m x k, the V subspace at this end
  Triple rho;   // k x k in basis coordinates
  CMat comp;    // m x (m-k)
  Triple tau;   // (m-k) x (m-k) in comp coordinates
  std::vector<double> remainder_decay;
  bool singular() const;
};

struct JumpData {
  int level = -1;
  std::vector<CVec> x;  // in C^{m_level}
  std::vector<CVec> q;  // quaternions as C^2
};

struct NahmData {
  SymmetryBreakingType type;
  DerivedInvariants inv;
  Framing framing;
  std::vector<NahmInterval> intervals;
  std::vector<std::array<PoleStructure, 2>> poles;  // per interval, [Left, Right]
  std::vector<JumpData> jumps;                      // per level; only internal levels used
  std::vector<std::array<SubspaceTriple, 2>> subspaces;
  std::string family;
  json params;

  int n_intervals() const { return static_cast<int>(intervals.size()); }
  const PoleStructure& pole(int i, Side s) const { return poles[i][static_cast<int>(s)]; }
  const SubspaceTriple& xyz(int i, Side s) const { return subspaces[i][static_cast<int>(s)]; }
};

// Recomputes pole structures, jump subspaces and X/Y/Z from fields, framing and jumps.
void finalize(NahmData& nd);

NahmData builtin_family(const std::string& name, const SymmetryBreakingType& t, const Framing& f,
                        const json& params = json::object());

// Value at the end including the O(1) part; for pole ends the regular part
// lim (T + pole term) is extrapolated.
Triple regular_value(const TField& f, Side s);

double nahm_residual(const NahmData& nd, const std::vector<double>& samples);
double nahm_residual_at(const TField& f, double t);

struct IvpOptions {
  int degree = 16;
  double collar_rel = 1e-3;
  double rtol = 1e-13;
  double atol = 1e-13;
  double blowup_cap = 1e8;
};
NahmInterval solve_nahm_ivp(double t0, const Triple& T_init, double lo, double hi, int steps,
                            const IvpOptions& opt = {});

struct LaxTable {
  std::vector<int> interval;                 // per sample
  std::vector<std::vector<std::vector<cd>>> eig;  // [zeta][sample] sorted by (re, im)
};
LaxTable lax_invariants(const NahmData& nd, const std::vector<cd>& zetas, const std::vector<double>& samples);
// Max drift of matched eigenvalues across samples.
double lax_drift(const LaxTable& tab);

VerificationReport check_pole_structure(const NahmData& nd);

struct JumpCheck {
  VerificationReport report;
  std::vector<JumpData> extracted;   // per level
  std::vector<double> residual;      // per level
};
JumpCheck check_jump_data(const NahmData& nd);
// Structured extraction for one internal level from tau's and C.
JumpData extract_jump(const NahmData& nd, int level, double* residual);

struct GaugeTransform {
  std::vector<GaugePtr> g;  // per interval
};
GaugeTransform identity_gauge(const NahmData& nd);
GaugeTransform random_gauge(const NahmData& nd, std::uint64_t seed, double amplitude = 0.5);
NahmData apply_gauge(const GaugeTransform& g, const NahmData& nd);

struct TemporalResult {
  NahmData data;
  GaugeTransform gauge;
  double max_t0 = 0;  // max |T0'| over the sample nodes
};
TemporalResult to_temporal_gauge(const NahmData& nd, int panels_per_half = 6, int degree = 16);

NahmData rescale(const SymmetryBreakingType& from, const SymmetryBreakingType& to, const NahmData& nd);

// Panel breakpoints over [lo+eps0, hi-eps0], geometric toward both ends.
std::vector<double> graded_breaks(double lo, double hi, int per_half, double collar_rel);

// Locates the interval containing t outside the collars; throws SampleOutOfRange.
int locate_sample(const NahmData& nd, double t, double collar_rel = 1e-3);

}  // namespace nahm
