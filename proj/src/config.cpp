#include "matbiorth/config.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "matbiorth/suite.hpp"

namespace matbiorth {

using nlohmann::json;

std::string Precision::label() const {
  return extended ? "ext:" + std::to_string(digits) : "double";
}

Precision parse_precision(const std::string& s) {
  if (s == "double") return {};
  if (s.rfind("ext:", 0) == 0) {
    const std::string tail = s.substr(4);
    std::size_t used = 0;
    int d = 0;
    try {
      d = std::stoi(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size() || d < 1)
      throw UsageError("precision: expected ext:<digits>, got '" + s + "'");
    if (d > std::numeric_limits<long double>::digits10 + 0)
      throw UsageError("precision: ext:" + std::to_string(d) + " exceeds the " +
                       std::to_string(std::numeric_limits<long double>::digits10) +
                       " digits of the extended backend");
    return {true, d};
  }
  throw UsageError("precision: expected double or ext:<digits>, got '" + s + "'");
}

void RunConfig::validate() const {
  if (n_max < 1) throw UsageError("n_max must be ≥ 1");
  if (!(rel_tol > 0 && rel_tol <= 1e-4)) throw UsageError("rel_tol must lie in (0, 1e-4]");
  if (!(dpiv_tolerance > 0)) throw UsageError("dpiv_tolerance must be positive");
  for (const auto& c : checks)
    if (!is_registered_check(c)) throw UsageError("unknown check '" + c + "'");
  if (!model.is_object() || !model.contains("kind"))
    throw UsageError("model must be an object with a kind");
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig c;
  try {
    if (!j.contains("model")) throw UsageError("config has no model");
    c.model = j.at("model");
    if (j.contains("n_max")) c.n_max = j.at("n_max").get<int>();
    if (j.contains("precision")) c.precision = parse_precision(j.at("precision").get<std::string>());
    if (j.contains("rel_tol")) c.rel_tol = j.at("rel_tol").get<double>();
    if (j.contains("checks")) c.checks = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("moments")) c.moment_count = j.at("moments").get<int>();
    if (j.contains("dpiv_tolerance")) c.dpiv_tolerance = j.at("dpiv_tolerance").get<double>();
    if (j.contains("eigen_alpha")) c.eigen_alpha = j.at("eigen_alpha");
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

namespace {

template <class R>
Cx<R> parse_entry(const json& e) {
  if (e.is_number()) return Cx<R>(static_cast<R>(e.get<double>()));
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return Cx<R>(static_cast<R>(e[0].get<double>()), static_cast<R>(e[1].get<double>()));
  throw UsageError("matrix entry must be a number or a [re, im] pair: " + e.dump());
}

template <class R>
Mat<R> field(const json& spec, const char* key) {
  if (!spec.contains(key)) throw UsageError(std::string("model is missing '") + key + "'");
  return parse_matrix<R>(spec.at(key));
}

template <class R>
MatrixPolynomial<R> parse_polynomial(const json& j) {
  if (!j.is_array() || j.empty()) throw UsageError("polynomial must be a nonempty coefficient list");
  std::vector<Mat<R>> c;
  for (const auto& m : j) c.push_back(parse_matrix<R>(m));
  for (const auto& m : c)
    if (m.rows() != c[0].rows()) throw UsageError("polynomial coefficients differ in size");
  return MatrixPolynomial<R>(std::move(c));
}

}  // namespace

template <class R>
Mat<R> parse_matrix(const json& j) {
  if (j.is_number()) return Mat<R>::Constant(1, 1, parse_entry<R>(j));
  if (!j.is_array() || j.empty()) throw UsageError("matrix must be a nonempty array of rows");
  const auto n = static_cast<int>(j.size());
  Mat<R> m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
      throw UsageError("matrix must be square: " + j.dump());
    for (int k = 0; k < n; ++k) m(i, k) = parse_entry<R>(j[i][k]);
  }
  return m;
}

template <class R>
WeightModel<R> build_model(const json& spec) {
  if (!spec.is_object() || !spec.contains("kind")) throw UsageError("model needs a kind");
  const std::string kind = spec.at("kind").get<std::string>();
  WeightModel<R> model = [&] {
    if (kind == "duran_grunbaum")
      return WeightModel<R>::duran_grunbaum(field<R>(spec, "A1"), field<R>(spec, "A2"),
                                           field<R>(spec, "alpha"));
    if (kind == "freud_ray") {
      const Mat<R> A = field<R>(spec, "A"), C = field<R>(spec, "C");
      const Mat<R> B = spec.contains("B") ? field<R>(spec, "B") : zeros<R>(A.rows());
      std::optional<Mat<R>> W0;
      if (spec.contains("W0")) W0 = field<R>(spec, "W0");
      return WeightModel<R>::freud_ray(A, B, C, W0);
    }
    if (kind == "frobenius") {
      PearsonData<R> p;
      p.hL = parse_polynomial<R>(spec.at("hL"));
      const int N = p.hL.dim();
      p.hR = spec.contains("hR") ? parse_polynomial<R>(spec.at("hR"))
                                 : MatrixPolynomial<R>::zero(N);
      p.W0L = spec.contains("W0L") ? field<R>(spec, "W0L") : eye<R>(N);
      p.W0R = spec.contains("W0R") ? field<R>(spec, "W0R") : eye<R>(N);
      return WeightModel<R>::frobenius(p);
    }
    throw UsageError("unknown model kind '" + kind + "'");
  }();
  if (spec.contains("scale")) model = model.scaled(static_cast<R>(spec.at("scale").get<double>()));
  return model;
}

template <class R>
json matrix_to_json(const Mat<R>& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k)
      row.push_back({static_cast<double>(m(i, k).real()), static_cast<double>(m(i, k).imag())});
    rows.push_back(row);
  }
  return rows;
}

template <class R>
std::string moments_csv(const MomentTable<R>& table) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<R>::max_digits10);
  const int N = table.dim();
  os << "n";
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k)
      os << ",W[" << i << "][" << k << "].re,W[" << i << "][" << k << "].im";
  os << "\n";
  for (int n = 0; n < table.size(); ++n) {
    os << n;
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) os << "," << table[n](i, k).real() << "," << table[n](i, k).imag();
    os << "\n";
  }
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write on " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

#define MATBIORTH_INSTANTIATE(R)                                        \
  template Mat<R> parse_matrix<R>(const json&);                         \
  template WeightModel<R> build_model<R>(const json&);                  \
  template json matrix_to_json<R>(const Mat<R>&);                       \
  template std::string moments_csv<R>(const MomentTable<R>&);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
