#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "matbiorth/weights.hpp"

namespace matbiorth {

struct CheckInfo {
  std::string name;
  std::string identity;  // what the residual measures
  double tolerance;      // on the relative residual; 0 when set per record
};

// Order here is the execution order of cmd_verify.
const std::vector<CheckInfo>& check_registry();
bool is_registered_check(const std::string& name);
const CheckInfo& check_info(const std::string& name);

struct CheckRecord {
  std::string check;
  int n = 0;
  std::optional<std::complex<double>> z;
  std::string side;  // "left", "right", or a sub-identity label; may be empty
  double residual = 0;  // relative: raw / max(1, scale of the terms)
  double raw = 0;
  double tolerance = 0;
  bool pass = false;
};

struct SkippedCheck {
  std::string check;
  std::string reason;
};

struct SuiteOptions {
  int n_max = 6;
  double rel_tol = 1e-13;
  std::vector<std::string> checks;  // empty: all
  bool parallel = true;
  // Test hook: moment k is scaled by (1 + 1e−3) before the polynomials are built.
  int corrupt_moment = -1;
  std::optional<std::pair<Mat<double>, Mat<double>>> eigen_alpha;
};

struct SuiteResult {
  std::vector<CheckRecord> records;
  std::vector<SkippedCheck> skipped;
  bool pass() const;
  const CheckRecord* first_failure() const;
};

// Runs the selected checks for n = 1..n_max over the standard z-ring.
template <class R>
SuiteResult run_suite(const WeightModel<R>& model, const SuiteOptions& opt);

}  // namespace matbiorth
