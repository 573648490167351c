#include "nahm/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace nahm {

const std::array<CMat, 3>& pauli() {
  static const std::array<CMat, 3> p = [] {
    std::array<CMat, 3> s;
    for (auto& m : s) m = CMat::Zero(2, 2);
    s[0](0, 1) = 1.0;
    s[0](1, 0) = 1.0;
    s[1](0, 1) = -I1;
    s[1](1, 0) = I1;
    s[2](0, 0) = 1.0;
    s[2](1, 1) = -1.0;
    return s;
  }();
  return p;
}

const std::array<CMat, 3>& sigma() {
  static const std::array<CMat, 3> s = [] {
    std::array<CMat, 3> out;
    for (int a = 0; a < 3; ++a) out[a] = -I1 * pauli()[a];
    return out;
  }();
  return s;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat spin(const CMat& t, int alpha) { return kron(t, sigma()[alpha]); }

CMat spin_identity(const CMat& t) { return kron(t, CMat::Identity(2, 2)); }

Triple su2_irrep(int k) {
  Triple e;
  double j = 0.5 * (k - 1);
  CMat jp = CMat::Zero(k, k), jz = CMat::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    double mz = j - i;
    jz(i, i) = mz;
    if (i > 0) jp(i - 1, i) = std::sqrt(j * (j + 1) - mz * (mz + 1));
  }
  CMat jm = jp.adjoint();
  CMat jx = 0.5 * (jp + jm);
  CMat jy = (jp - jm) / (2.0 * I1);
  e[0] = -I1 * jx;
  e[1] = -I1 * jy;
  e[2] = -I1 * jz;
  return e;
}

Triple su2_blocks(const std::vector<int>& dims) {
  int m = 0;
  for (int d : dims) m += d;
  Triple out = triple_zero(m);
  int off = 0;
  for (int d : dims) {
    Triple b = su2_irrep(d);
    for (int a = 0; a < 3; ++a) out[a].block(off, off, d, d) = b[a];
    off += d;
  }
  return out;
}

CMat skew_part(const CMat& a) { return 0.5 * (a - a.adjoint()); }
CMat herm_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }
CMat comm(const CMat& a, const CMat& b) { return a * b - b * a; }

double norm2(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(a);
  return svd.singularValues()(0);
}

double max_abs(const CMat& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

CMat polar_unitary(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

CMat inv_sqrt_herm(const CMat& g) {
  Eigen::SelfAdjointEigenSolver<CMat> es(herm_part(g));
  RVec ev = es.eigenvalues();
  RVec s(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) s(i) = 1.0 / std::sqrt(ev(i));
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

CMat complement_basis(const CMat& b, int n) {
  if (b.cols() == 0) return CMat::Identity(n, n);
  Eigen::HouseholderQR<CMat> qr(b);
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  return q.rightCols(n - b.cols());
}

CMat orth_basis(const CMat& b, double rel_tol) {
  if (b.cols() == 0) return CMat(b.rows(), 0);
  Eigen::JacobiSVD<CMat> svd(b, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  int r = 0;
  double smax = s.size() ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * smax && s(i) > 0) ++r;
  return svd.matrixU().leftCols(r);
}

CMat projector(const CMat& basis) { return basis * basis.adjoint(); }

Triple triple_zero(int m) {
  Triple t;
  for (auto& x : t) x = CMat::Zero(m, m);
  return t;
}

Triple triple_scale(const Triple& t, double s) {
  Triple o;
  for (int a = 0; a < 3; ++a) o[a] = s * t[a];
  return o;
}

Triple triple_conj(const CMat& u, const Triple& t) {
  Triple o;
  for (int a = 0; a < 3; ++a) o[a] = u * t[a] * u.adjoint();
  return o;
}

double triple_max_abs(const Triple& t) {
  double m = 0;
  for (const auto& x : t) m = std::max(m, max_abs(x));
  return m;
}

}  // namespace nahm
