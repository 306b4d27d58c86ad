#include <CLI11.hpp>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "matbiorth/biorth.hpp"
#include "matbiorth/config.hpp"
#include "matbiorth/painleve.hpp"
#include "matbiorth/suite.hpp"

using namespace matbiorth;
using nlohmann::json;

namespace {

enum Exit { Pass = 0, Usage = 1, Quadrature = 2, Regularity = 3, Verification = 4, WrongShape = 5 };

struct Invocation {
  std::string config_path;
  std::string out;
  std::string precision;
  std::optional<int> nmax;
  int corrupt_moment = -1;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::QuadratureDivergence:
      return Quadrature;
    case ErrorKind::RegularityFailure:
      return Regularity;
    case ErrorKind::Shape:
      return WrongShape;
    case ErrorKind::NotEigenfunction:
    case ErrorKind::CommutativityViolation:
    case ErrorKind::SingularFactor:
    case ErrorKind::TooCloseToSupport:
    case ErrorKind::PoleAtZero:
      return Verification;
    default:
      return Usage;
  }
}

RunConfig resolve(const Invocation& inv) {
  RunConfig c = load_config(inv.config_path);
  if (!inv.out.empty()) c.output_dir = inv.out;
  if (!inv.precision.empty()) c.precision = parse_precision(inv.precision);
  if (inv.nmax) c.n_max = *inv.nmax;
  c.validate();
  return c;
}

std::string path_in(const RunConfig& c, const std::string& file) {
  return (std::filesystem::path(c.output_dir) / file).string();
}

json header(const RunConfig& c, const char* command) {
  return {{"command", command},
          {"model", c.model},
          {"n_max", c.n_max},
          {"precision", c.precision.label()},
          {"rel_tol", c.rel_tol},
          {"timestamp", utc_timestamp()}};
}

template <class R>
json table_json(const MomentTable<R>& t) {
  json rows = json::array();
  for (int n = 0; n < t.size(); ++n)
    rows.push_back({{"n", n},
                    {"W", matrix_to_json<R>(t[n])},
                    {"err_est", static_cast<double>(t.err_est[n])}});
  return rows;
}

template <class R>
int cmd_moments(const RunConfig& c) {
  const auto model = build_model<R>(c.model);
  const int M = c.moment_count >= 0 ? c.moment_count : 2 * c.n_max + 2;
  const auto quad = moments_by_quadrature<R>(model, M, static_cast<R>(c.rel_tol));
  const int seed = std::max(1, model.pearson().degree());
  const auto rec = moments_by_recurrence<R>(model, quad.prefix(std::min(seed, quad.size())), M);

  json j = header(c, "moments");
  j["quadrature"] = table_json<R>(quad);
  j["recurrence"] = table_json<R>(rec);
  json delta = json::array();
  bool agree = true;
  for (int n = 0; n <= M; ++n) {
    const R diff = max_abs<R>(Mat<R>(quad[n] - rec[n]));
    const R scale = std::max(R(1), max_abs<R>(quad[n]));
    const R tol = std::max(R(10) * (quad.err_est[n] + rec.err_est[n]) / scale, R(1e-9));
    const bool ok = diff / scale <= tol;
    agree = agree && ok;
    delta.push_back({{"n", n},
                     {"abs", static_cast<double>(diff)},
                     {"relative", static_cast<double>(diff / scale)},
                     {"tolerance", static_cast<double>(tol)},
                     {"pass", ok}});
  }
  j["cross_oracle"] = delta;
  j["cross_oracle_pass"] = agree;
  const int n_hankel = std::min(c.n_max, (M - 2) / 2);
  if (n_hankel >= 0)
    j["hankel_condition"] = static_cast<double>(block_moment_matrix<R>(quad, n_hankel).condition);

  write_atomic(path_in(c, "moments.csv"), moments_csv<R>(quad));
  write_atomic(path_in(c, "moments.json"), j.dump(2) + "\n");
  if (!agree) std::cerr << "warning: quadrature and recurrence moments disagree\n";
  return Pass;
}

json record_json(const CheckRecord& r) {
  json z = nullptr;
  if (r.z) z = {r.z->real(), r.z->imag()};
  json j = {{"check", r.check}, {"n", r.n},           {"z", z},
            {"residual", r.residual}, {"raw", r.raw}, {"tolerance", r.tolerance},
            {"pass", r.pass}};
  if (!r.side.empty()) j["side"] = r.side;
  return j;
}

template <class R>
int cmd_verify(const RunConfig& c, int corrupt_moment) {
  const auto model = build_model<R>(c.model);
  SuiteOptions opt;
  opt.n_max = c.n_max;
  opt.rel_tol = c.rel_tol;
  opt.checks = c.checks;
  opt.corrupt_moment = corrupt_moment;
  if (c.eigen_alpha) {
    const auto& a = *c.eigen_alpha;
    if (!a.contains("L") || !a.contains("R")) throw UsageError("eigen_alpha needs L and R");
    opt.eigen_alpha = std::make_pair(parse_matrix<double>(a.at("L")), parse_matrix<double>(a.at("R")));
  }
  const SuiteResult res = run_suite<R>(model, opt);

  json j = header(c, "verify");
  j["checks"] = c.checks;
  json recs = json::array();
  for (const auto& r : res.records) recs.push_back(record_json(r));
  j["records"] = recs;
  json skipped = json::array();
  for (const auto& s : res.skipped) skipped.push_back({{"check", s.check}, {"reason", s.reason}});
  j["skipped"] = skipped;
  j["pass"] = res.pass();
  write_atomic(path_in(c, "verify.json"), j.dump(2) + "\n");

  for (const auto& s : res.skipped) std::cerr << "skipped " << s.check << ": " << s.reason << "\n";
  if (const CheckRecord* f = res.first_failure()) {
    std::cerr << "verification failed: " << record_json(*f).dump() << "\n";
    return Verification;
  }
  std::cout << res.records.size() << " checks passed\n";
  return Pass;
}

template <class R>
int cmd_dpiv(const RunConfig& c) {
  const auto model = build_model<R>(c.model);
  const auto& p = model.pearson();
  if (!p.one_sided() || p.hL.trimmed().degree() != 2)
    throw Error(ErrorKind::Shape, "dpiv needs one-sided Pearson data of degree 2");
  const int n_build = c.n_max + 2;
  const auto table = moments_by_quadrature<R>(model, 2 * n_build + 3, static_cast<R>(c.rel_tol));
  const auto sys = build_biorth<R>(table, n_build);
  const auto d = make_dpiv_data<R>(sys, p);

  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "n,residual1_norm,residual2_norm,relative1,relative2\n";
  int first_bad = -1;
  for (int n = 1; n <= c.n_max; ++n) {
    const auto r = dpiv_residuals<R>(d, n);
    const double rel1 = static_cast<double>(r.r1.relative()), rel2 = static_cast<double>(r.r2.relative());
    os << n << "," << static_cast<double>(r.r1.raw) << "," << static_cast<double>(r.r2.raw) << ","
       << rel1 << "," << rel2 << "\n";
    if (first_bad < 0 && !(rel1 <= c.dpiv_tolerance && rel2 <= c.dpiv_tolerance)) first_bad = n;
  }
  write_atomic(path_in(c, "dpiv.csv"), os.str());
  if (first_bad >= 0) {
    std::cerr << "dPIV residual above " << c.dpiv_tolerance << " at n = " << first_bad << "\n";
    return Verification;
  }
  return Pass;
}

template <class R>
int dispatch(const std::string& command, const RunConfig& c, const Invocation& inv) {
  if (command == "moments") return cmd_moments<R>(c);
  if (command == "verify") return cmd_verify<R>(c, inv.corrupt_moment);
  return cmd_dpiv<R>(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix biorthogonal polynomials on the ray: moments, identity checks, dPIV residuals"};
  app.require_subcommand(1);
  Invocation inv;
  const std::pair<const char*, const char*> commands[] = {
      {"moments", "write moments.csv and moments.json (quadrature and recurrence tables)"},
      {"verify", "run the identity checks and write verify.json"},
      {"dpiv", "write dpiv.csv with the non-Abelian dPIV residuals"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "JSON run configuration")->required();
    sub->add_option("--out", inv.out, "output directory (overrides output_dir)");
    sub->add_option("--precision", inv.precision, "double or ext:<digits>");
    sub->add_option("--nmax", inv.nmax, "highest degree (overrides n_max)");
    if (std::string(name) == "verify")
      sub->add_option("--corrupt-moment", inv.corrupt_moment)->group("");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return Usage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const RunConfig c = resolve(inv);
    if (c.precision.extended) return dispatch<long double>(command, c, inv);
    return dispatch<double>(command, c, inv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  }
}
