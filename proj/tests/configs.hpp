#pragma once

#include "nahm/sbtype.hpp"

namespace testcfg {

inline nahm::SymmetryBreakingType cfg_a() { return {{-1.0, 1.0}, {1, 1}, {{1}, {-1}}}; }
inline nahm::SymmetryBreakingType cfg_b() { return {{-2.0, 1.0}, {1, 2}, {{2}, {-1, -1}}}; }
inline nahm::SymmetryBreakingType cfg_c() { return {{-1.0, 0.0, 1.0}, {2, 2, 2}, {{1, 1}, {0, 0}, {-1, -1}}}; }

}  // namespace testcfg
