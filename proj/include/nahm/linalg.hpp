#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace nahm {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Vec3 = std::array<double, 3>;
using Triple = std::array<CMat, 3>;

inline constexpr cd I1{0.0, 1.0};

// Quaternion units on C^2, sigma_a = -i * pauli_a.
// sigma_1 sigma_2 = sigma_3 (cyclic), sigma_a^2 = -1.
const std::array<CMat, 3>& sigma();
const std::array<CMat, 3>& pauli();

CMat kron(const CMat& a, const CMat& b);

// Spinor layout is (row index)*2 + (quaternion slot), so T (x) sigma = kron(T, sigma).
CMat spin(const CMat& t, int alpha);
CMat spin_identity(const CMat& t);

// Skew-Hermitian generators of the k-dimensional irreducible su(2) module,
// normalized so that [e1,e2] = e3 cyclic and -sum e_a^2 = (k^2-1)/4.
Triple su2_irrep(int k);
// Block sum of irreducibles.
Triple su2_blocks(const std::vector<int>& dims);

CMat skew_part(const CMat& a);
CMat herm_part(const CMat& a);
CMat comm(const CMat& a, const CMat& b);

double norm2(const CMat& a);  // spectral norm
double max_abs(const CMat& a);

// Unitary factor of the polar decomposition a = U P.
CMat polar_unitary(const CMat& a);
// Inverse square root of a Hermitian positive-definite matrix.
CMat inv_sqrt_herm(const CMat& g);
// Orthonormal basis of the orthogonal complement of the column span of b (in C^n).
CMat complement_basis(const CMat& b, int n);
// Orthonormal basis of span(b); columns dropped if numerically dependent.
CMat orth_basis(const CMat& b, double rel_tol = 1e-10);
CMat projector(const CMat& basis);

// Haar-distributed unitary from a seeded Gaussian source.
template <class Rng>
CMat random_unitary(int n, Rng& rng);

Triple triple_zero(int m);
Triple triple_scale(const Triple& t, double s);
Triple triple_conj(const CMat& u, const Triple& t);  // u t u^dagger
double triple_max_abs(const Triple& t);

}  // namespace nahm

#include <random>

namespace nahm {

template <class Rng>
CMat random_unitary(int n, Rng& rng) {
  if (n == 0) return CMat(0, 0);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = cd(nd(rng), nd(rng));
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  CMat r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    cd d = r(j, j);
    double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

}  // namespace nahm
