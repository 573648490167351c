#pragma once

#include "nahm/nahm_core.hpp"
#include "nahm/report.hpp"
#include "nahm/sbtype.hpp"

#include <cstdint>
#include <string>

namespace nahm {

// Complex matrices are row arrays of [re, im] pairs.
json cmat_to_json(const CMat& m);
CMat cmat_from_json(const json& j);
json cvec_to_json(const CVec& v);
CVec cvec_from_json(const json& j);
json triple_to_json(const Triple& t);
Triple triple_from_json(const json& j);

json type_to_json(const SymmetryBreakingType& t);
SymmetryBreakingType type_from_json(const json& j);
json framing_to_json(const Framing& f);
Framing framing_from_json(const json& j);

inline constexpr const char* kNahmDataVersion = "nahm-data/1";
json nahm_to_json(const NahmData& nd);
NahmData nahm_from_json(const json& j);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

// Shortest round-trip decimal representation.
std::string fmt_double(double v);

}  // namespace nahm
