#pragma once

#include <complex>
#include <cstddef>

namespace nahm::kernels {

using cd = std::complex<double>;

// sum_j w[j] * sum_c conj(a[j*comps + c]) * b[j*comps + c]
// comps must be even (spinors carry a C^2 factor).
cd wdot_scalar(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps);
cd wdot_avx2(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps);
cd wdot(const double* w, const cd* a, const cd* b, std::size_t nodes, std::size_t comps);

bool avx2_available();
// Testing hook: route wdot to the scalar path.
void set_force_scalar(bool v);

}  // namespace nahm::kernels
