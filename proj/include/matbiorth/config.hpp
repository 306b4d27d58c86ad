#pragma once

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "matbiorth/moments.hpp"
#include "matbiorth/weights.hpp"

namespace matbiorth {

// Bad invocation or unreadable/invalid configuration; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Precision {
  bool extended = false;
  int digits = 15;
  std::string label() const;
};

// "double" or "ext:<digits>" with digits ≤ 18 (the long double mantissa).
Precision parse_precision(const std::string& s);

struct RunConfig {
  nlohmann::json model;
  int n_max = 6;
  Precision precision;
  double rel_tol = 1e-13;
  std::vector<std::string> checks;  // empty: every registered check
  std::string output_dir = ".";
  int moment_count = -1;            // moments command; default 2·n_max + 2
  double dpiv_tolerance = 1e-6;
  std::optional<nlohmann::json> eigen_alpha;  // {"L": matrix, "R": matrix}

  void validate() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Entries are numbers or [re, im] pairs; a bare number is a 1×1 matrix.
template <class R>
Mat<R> parse_matrix(const nlohmann::json& j);

// kinds: duran_grunbaum {A1, A2, alpha}, freud_ray {A, B?, C, W0?},
// frobenius {hL: [coefficients], hR?, W0L?, W0R?}; optional "scale".
template <class R>
WeightModel<R> build_model(const nlohmann::json& spec);

template <class R>
nlohmann::json matrix_to_json(const Mat<R>& m);

// header: n, W[i][j].re, W[i][j].im, ...
template <class R>
std::string moments_csv(const MomentTable<R>& table);

// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::string& path, const std::string& content);

std::string utc_timestamp();

}  // namespace matbiorth
