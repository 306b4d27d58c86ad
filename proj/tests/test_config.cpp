#include "test_support.hpp"

#include <filesystem>
#include <fstream>

#include "matbiorth/config.hpp"
#include "matbiorth/corpus.hpp"
#include "matbiorth/suite.hpp"

using namespace testing;
using nlohmann::json;

namespace {

template <class F>
bool usage_error(F f) {
  try {
    f();
  } catch (const UsageError&) {
    return true;
  }
  return false;
}

json lag(double alpha) { return {{"kind", "duran_grunbaum"}, {"A1", -0.5}, {"A2", -0.5}, {"alpha", alpha}}; }

}  // namespace

TEST_CASE("precision flag") {
  CHECK_FALSE(parse_precision("double").extended);
  const auto p = parse_precision("ext:18");
  CHECK(p.extended);
  CHECK(p.digits == 18);
  CHECK(p.label() == "ext:18");
  CHECK(usage_error([] { parse_precision("ext:30"); }));
  CHECK(usage_error([] { parse_precision("ext:0"); }));
  CHECK(usage_error([] { parse_precision("ext:1x"); }));
  CHECK(usage_error([] { parse_precision("quad"); }));
}

TEST_CASE("config defaults and overrides") {
  const auto c = parse_config({{"model", lag(0.5)}});
  CHECK(c.n_max == 6);
  CHECK(c.rel_tol == 1e-13);
  CHECK(c.checks.empty());
  CHECK(c.output_dir == ".");
  CHECK(c.moment_count == -1);

  const auto d = parse_config({{"model", lag(0)}, {"n_max", 3}, {"moments", 10}, {"checks", {"zero_curvature"}},
                               {"precision", "ext:18"}, {"output_dir", "x"}});
  CHECK(d.n_max == 3);
  CHECK(d.moment_count == 10);
  CHECK(d.checks == std::vector<std::string>{"zero_curvature"});
  CHECK(d.precision.extended);
}

TEST_CASE("config validation") {
  CHECK(usage_error([] { parse_config(json::array()); }));
  CHECK(usage_error([] { parse_config({{"n_max", 3}}); }));
  CHECK(usage_error([] { parse_config({{"model", lag(0)}, {"n_max", 0}}); }));
  CHECK(usage_error([] { parse_config({{"model", lag(0)}, {"rel_tol", 1e-2}}); }));
  CHECK(usage_error([] { parse_config({{"model", lag(0)}, {"checks", {"no_such_check"}}}); }));
  CHECK(usage_error([] { parse_config({{"model", lag(0)}, {"n_max", "six"}}); }));
  CHECK(usage_error([] { load_config("/nonexistent/config.json"); }));
}

TEST_CASE("matrix parsing") {
  CHECK(diff(parse_matrix<double>(json(2.5)), m1(2.5)) == 0);
  CHECK(diff(parse_matrix<double>(json::parse("[[1, [0, 2]], [3, 4]]")), m2(1, Cd(0, 2), 3, 4)) == 0);
  CHECK(usage_error([] { parse_matrix<double>(json::parse("[[1, 2], [3]]")); }));
  CHECK(usage_error([] { parse_matrix<double>(json::parse("[[1, \"a\"], [3, 4]]")); }));
  const json round = matrix_to_json<double>(m2(1, Cd(0, 2), 3, 4));
  CHECK(diff(parse_matrix<double>(round), m2(1, Cd(0, 2), 3, 4)) == 0);
}

TEST_CASE("model construction from JSON") {
  const auto a = build_model<double>(lag(0.5));
  CHECK(a.kind() == EvaluatorKind::DuranGrunbaum);
  CHECK(std::abs(a.eval(2)(0, 0) - std::sqrt(2.0) * std::exp(-2.0)) < 1e-15);

  const auto f = build_model<double>(json::parse(R"({"kind": "freud_ray", "A": 1, "C": -2, "scale": 3})"));
  CHECK(f.kind() == EvaluatorKind::FreudRay);
  CHECK(std::abs(f.eval(2)(0, 0) - 3 * 2 * std::exp(-4.0)) < 1e-14);

  const auto s = build_model<double>(json::parse(R"({"kind": "frobenius", "hL": [0.5, -1]})"));
  CHECK(s.kind() == EvaluatorKind::FrobeniusSeries);
  CHECK(s.pearson().one_sided());

  CHECK(usage_error([] { build_model<double>(json::parse(R"({"kind": "jacobi"})")); }));
  CHECK(usage_error([] { build_model<double>(json::parse(R"({"kind": "freud_ray", "A": 1})")); }));
}

TEST_CASE("moments CSV layout") {
  const auto t = moments_by_quadrature<double>(corpus::dg_commuting<double>(), 2);
  const std::string csv = moments_csv<double>(t);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,W[0][0].re,W[0][0].im,W[0][1].re,W[0][1].im,W[1][0].re,W[1][0].im,W[1][1].re,W[1][1].im");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("atomic writes create directories and leave no temporaries") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("matbiorth_cfg_" + std::to_string(::getpid()));
  const fs::path file = dir / "a" / "b.txt";
  write_atomic(file.string(), "one\n");
  write_atomic(file.string(), "two\n");
  std::ifstream in(file);
  std::string s;
  std::getline(in, s);
  CHECK(s == "two");
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
  fs::remove_all(dir);
}

TEST_CASE("check registry") {
  const auto& reg = check_registry();
  CHECK(reg.size() == 25);
  CHECK(reg.front().name == "biorthogonality");
  for (const auto& c : reg) {
    CHECK(is_registered_check(c.name));
    CHECK_FALSE(c.identity.empty());
  }
  CHECK_FALSE(is_registered_check("biorthogonal"));
}

TEST_CASE("suite filtering and the corruption hook") {
  const auto m = corpus::laguerre<double>(0.5);
  SuiteOptions opt;
  opt.n_max = 3;
  opt.checks = {"zero_curvature"};
  const auto r = run_suite<double>(m, opt);
  CHECK(r.pass());
  REQUIRE_FALSE(r.records.empty());
  for (const auto& rec : r.records) CHECK(rec.check == "zero_curvature");

  opt.checks = {"biorthogonality", "recurrence"};
  opt.corrupt_moment = 3;
  const auto bad = run_suite<double>(m, opt);
  CHECK_FALSE(bad.pass());
  REQUIRE(bad.first_failure() != nullptr);
  CHECK(bad.first_failure()->check == "biorthogonality");
}

TEST_CASE("suite skips checks that do not apply") {
  SuiteOptions opt;
  opt.n_max = 2;
  opt.checks = {"dpiv", "eigenvalue", "scalar_laguerre"};
  const auto r = run_suite<double>(corpus::dg_commuting<double>(), opt);
  std::vector<std::string> skipped;
  for (const auto& s : r.skipped) skipped.push_back(s.check);
  CHECK(std::find(skipped.begin(), skipped.end(), "dpiv") != skipped.end());
  CHECK(std::find(skipped.begin(), skipped.end(), "scalar_laguerre") != skipped.end());
  CHECK(std::find(skipped.begin(), skipped.end(), "eigenvalue") == skipped.end());
  CHECK(r.pass());
}
