#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace nahm {

// Error carrying a stable name such as "NotTraceFree" or "WrongFiberDimension".
class NahmError : public std::runtime_error {
 public:
  NahmError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

struct CheckRecord {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string details;
};

struct VerificationReport {
  std::vector<CheckRecord> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(std::string name, bool pass, double measured, double tol, std::string details = {}) {
    checks.push_back({std::move(name), pass, measured, tol, std::move(details)});
  }
  // Record "measured <= tol" as a check.
  void bound(std::string name, double measured, double tol, std::string details = {}) {
    add(std::move(name), measured <= tol, measured, tol, std::move(details));
  }
  void merge(const VerificationReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
  const CheckRecord* first_failure() const {
    for (const auto& c : checks)
      if (!c.pass) return &c;
    return nullptr;
  }
};

nlohmann::json to_json(const VerificationReport& r);

}  // namespace nahm
