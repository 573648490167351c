#pragma once

#include "nahm/asymptotics.hpp"
#include "nahm/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nahm::cli {

enum Exit { kPass = 0, kFail = 1, kUsage = 2 };

// --fd-step RULE: "auto", a number, "fixed:H" or "rel:C" (C * max(1, |x|)).
struct FdRule {
  enum Kind { Auto, Fixed, Relative } kind = Auto;
  double value = 0;
  double step(const Vec3& x) const;
};
FdRule parse_fd_rule(const std::string& s);

struct Flags {
  std::string command, config, out;
  int workers = 1;
  int nodes = 0;       // 0 keeps the solver default
  double collar = 0;   // 0 keeps the solver default
  std::string fd_step = "auto";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

struct Tolerances {
  double bogomolny = 1e-4;
  double dphi = 1e-3;
  double nahm_residual = 1e-8;
  double lax = 1e-8;
  double fit_lambda = 1e-3;
  double fit_k = 0.1;
  double structure = 1e-8;
};

struct RunConfig {
  json data_doc;
  std::string input_hash, config_hash;
  SolverOptions solver;
  FdRule fd;
  int workers = 1;
  std::uint64_t seed = 0;
  Tolerances tol;
  std::vector<Vec3> points;
  Vec3 ray_direction{0, 0, 1};
  std::vector<double> ray_radii{4, 8, 16};
  std::string reduce_kind = "so";
  std::vector<Vec3> reduce_points;
  std::optional<SymmetryBreakingType> claimed_type;
};

// Reads the config file; throws NahmError("ConfigParse") on unreadable or malformed input.
RunConfig load_config(const Flags& f);
// Grid spec: {"lo","hi","counts"}, {"points"} or {"random": {"count","radius"}}; x varies slowest.
std::vector<Vec3> grid_points(const json& spec, std::uint64_t seed);

struct Outcome {
  int code = kPass;
  json report;
  std::string artifact;  // CSV for field/sweep, empty otherwise
};

Outcome cmd_validate(const RunConfig& rc);
Outcome cmd_field(const RunConfig& rc);
Outcome cmd_ray(const RunConfig& rc);
Outcome cmd_reduce(const RunConfig& rc);
Outcome cmd_sweep(const RunConfig& rc);

inline constexpr const char* kFieldHeader =
    "index,x,y,z,eigenvalues,trace_im,bogomolny_residual,cross_f_fd,cross_dphi_fd,dphi_mismatch,green_residual,"
    "fiber_gap,fd_step";
inline constexpr const char* kSweepHeader = "index,x,y,z,dimension,gap,gram_residual,eigenvalues,error";

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nahm::cli
