#pragma once

#include "nahm/linalg.hpp"
#include "nahm/report.hpp"

#include <cstdint>
#include <vector>

namespace nahm {

// Levels are indexed a = 0..n-1 and intervals i = 0..n-2; interval i runs
// from lambda[i] to lambda[i+1] and carries matrices of size m[i].
struct SymmetryBreakingType {
  std::vector<double> lambda;
  std::vector<int> ranks;
  std::vector<std::vector<int>> chern;

  bool operator==(const SymmetryBreakingType&) const = default;
};

struct LevelInvariants {
  int r_plus = 0, r_minus = 0, r_zero = 0;
  int k_plus = 0, k_minus = 0, k = 0;
  int m = 0;  // m_a = sum_{b<=a} k_b
  std::vector<int> blocks_plus;   // positive entries, descending
  std::vector<int> blocks_minus;  // |negative entries|, descending
};

struct DerivedInvariants {
  int n = 0;
  int N = 0;
  std::vector<LevelInvariants> levels;

  int m(int a) const { return (a < 0 || a >= n) ? 0 : levels[a].m; }
  int intervals() const { return n - 1; }
  // Interval dimension, i.e. m of the level on its left.
  int dim(int i) const { return m(i); }
};

DerivedInvariants validate_type(const SymmetryBreakingType& t);

struct Framing {
  std::vector<CMat> vplus;   // per interval i: basis in C^{m_i}, dim k_plus of level i
  std::vector<CMat> vminus;  // per interval i: basis in C^{m_i}, dim k_minus of level i+1
  // Per level a (internal levels only, else empty): partial isometry C^{m_{a-1}} -> C^{m_a}
  // mapping the complement of vminus[a-1] onto the complement of vplus[a].
  std::vector<CMat> cmap;
};

VerificationReport validate_framing(const SymmetryBreakingType& t, const Framing& f);
// Throws the first failure of validate_framing as a NahmError.
void require_framing(const SymmetryBreakingType& t, const Framing& f);

Framing coordinate_framing(const SymmetryBreakingType& t);
Framing random_framing(const SymmetryBreakingType& t, std::uint64_t seed);

}  // namespace nahm
