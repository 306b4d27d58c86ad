#include "matbiorth/suite.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "matbiorth/biorth.hpp"
#include "matbiorth/moments.hpp"
#include "matbiorth/painleve.hpp"
#include "matbiorth/rhp.hpp"

namespace matbiorth {

const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> reg = {
      {"biorthogonality", "<P_n^L, P_m^R> = delta_nm C_n^{-1}, integrated directly", 1e-9},
      {"moment_cross_oracle", "quadrature moments = Pearson recurrence moments", 0},
      {"recurrence", "z P_n = P_{n+1} + beta_n P_n + gamma_n P_{n-1}", 1e-8},
      {"normalization_consistency", "<P_n^L, z^n> = <z^n, P_n^R>", 1e-8},
      {"boundary_conditions", "zW, (zW)' - a^L W, (zW)' - W a^R vanish at 0 and infinity", 1e-8},
      {"weight_second_order", "(zW)'' - (a^L W)' + b^L W = W b^R", 1e-7},
      {"determinant", "det Y_n = 1", 1e-7},
      {"corollary", "Q_n^L P_{n-1}^R - P_n^L Q_{n-1}^R = C_{n-1}^{-1} and companions", 1e-7},
      {"inverse_consistency", "Y_n^L (J Y_n^R J^{-1}) = I", 1e-7},
      {"transfer", "Y_{n+1} = T_n Y_n", 1e-7},
      {"structure_forms", "entrywise structure matrix = large-z expansion form", 1e-8},
      {"structure_numeric", "explicit zM_n = z Z_n' Z_n^{-1} numerically", 1e-6},
      {"laurent_residue", "residue of M_n at 0 = explicit zM_n at 0", 1e-5},
      {"zero_curvature", "M~_{n+1} T_n - T_n M~_n = z diag(I, 0)", 1e-8},
      {"first_order_ode", "z Y' + Y diag(h^L, -h^R) = M~ Y", 1e-6},
      {"second_order_ode", "z Y'' + Y' diag(2h^L+I, -2h^R+I) + Y diag(N(h^L), N(-h^R)) = N(M~) Y", 1e-5},
      {"polynomial_ode", "first block row of both ODEs restricted to P_n^L", 1e-8},
      {"constant_jump", "Z_n^R = S (Z_n^L)^{-1} S^{-1}", 1e-7},
      {"right_structure", "M_n^R = -S M_n^L S^{-1}", 1e-6},
      {"eigenvalue", "L^L(P_n^L) = lambda^L P_n^L, L^R(P_n^R) = P_n^R lambda^R, lambda^L C_n^{-1} = C_n^{-1} lambda^R", 1e-8},
      {"adjointness", "<l^L P, Q> = <P, l^R Q> on monomials of degree <= 3", 1e-7},
      {"scalar_laguerre", "z P'' - (z-a-1) P' + n P = 0 and z Q'' + (z-a+1) Q' + (n+1) Q = 0", 1e-6},
      {"dpiv", "non-Abelian dPIV pair for quadratic one-sided Pearson data", 1e-7},
      {"xi_mu", "beta mu = -(xi_n + xi_{n+1}), xi_{n+1}^2 - xi_0^2 = gamma_{n+1} mu_n mu_{n+1}", 1e-7},
      {"ghr", "(xi_n + xi_{n+1})(xi_{n+1} + xi_{n+2}) = ((C gamma_{n+1})^{-1}(xi_{n+1}^2 - xi_0^2))^2", 1e-7},
  };
  return reg;
}

bool is_registered_check(const std::string& name) {
  const auto& reg = check_registry();
  return std::any_of(reg.begin(), reg.end(), [&](const CheckInfo& c) { return c.name == name; });
}

const CheckInfo& check_info(const std::string& name) {
  for (const auto& c : check_registry())
    if (c.name == name) return c;
  throw Error(ErrorKind::Shape, "unregistered check " + name);
}

bool SuiteResult::pass() const { return first_failure() == nullptr; }

const CheckRecord* SuiteResult::first_failure() const {
  for (const auto& r : records)
    if (!r.pass) return &r;
  return nullptr;
}

namespace {

template <class R>
std::complex<double> to_double(Cx<R> z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

template <class R>
class Runner {
 public:
  Runner(const WeightModel<R>& model, const SuiteOptions& opt) : model_(model), opt_(opt) {
    const auto& reg = check_registry();
    for (const auto& c : reg)
      if (opt.checks.empty() ||
          std::find(opt.checks.begin(), opt.checks.end(), c.name) != opt.checks.end())
        selected_.insert(c.name);
  }

  SuiteResult run() {
    const auto& p = model_.pearson();
    const int n_max = opt_.n_max;
    const bool quadratic = p.one_sided() && p.hL.trimmed().degree() == 2;
    const bool wants_painleve = on("dpiv") || on("xi_mu") || on("ghr");
    for (const char* c : {"dpiv", "xi_mu", "ghr"})
      if (on(c) && !quadratic) skip(c, "needs one-sided Pearson data of degree 2");
    n_build_ = n_max + 1 + (quadratic && wants_painleve ? 1 : 0);

    const int M = std::max(2 * n_build_ + 3, 21);
    const R tol = static_cast<R>(opt_.rel_tol);
    table_ = moments_by_quadrature<R>(model_, M, tol, opt_.parallel);
    oracle_ = moments_by_recurrence<R>(model_, table_.prefix(std::max(1, p.degree())), M);
    if (opt_.corrupt_moment >= 0 && opt_.corrupt_moment < table_.size())
      table_.moments[opt_.corrupt_moment] *= R(1) + R(1e-3);

    sys_ = build_biorth<R>(table_, n_build_);

    biorth_checks();
    weight_checks();
    polynomial_checks();
    ring_checks();
    pointwise_checks();
    eigen_checks();
    if (quadratic && wants_painleve) painleve_checks();
    return std::move(out_);
  }

 private:
  bool on(const std::string& c) const { return selected_.count(c) > 0; }

  void skip(const std::string& c, const std::string& why) { out_.skipped.push_back({c, why}); }

  void add(const std::string& check, int n, std::optional<Cx<R>> z, const std::string& side,
           Residual<R> r, double tolerance) {
    CheckRecord rec;
    rec.check = check;
    rec.n = n;
    if (z) rec.z = to_double<R>(*z);
    rec.side = side;
    rec.raw = static_cast<double>(r.raw);
    rec.residual = static_cast<double>(r.relative());
    rec.tolerance = tolerance;
    rec.pass = std::isfinite(rec.residual) && rec.residual <= tolerance;
    out_.records.push_back(std::move(rec));
  }

  void add(const std::string& check, int n, std::optional<Cx<R>> z, const std::string& side,
           Residual<R> r) {
    add(check, n, z, side, r, check_info(check).tolerance);
  }

  void biorth_checks() {
    const int n_max = opt_.n_max;
    if (on("biorthogonality")) {
      const auto G = gram_by_quadrature<R>(model_, sys_, n_max, static_cast<R>(opt_.rel_tol),
                                           opt_.parallel);
      for (int n = 0; n <= n_max; ++n) {
        const R cn = max_abs<R>(sys_.Cinv[n]);
        R off = 0, diag = 0;
        for (int m = 0; m <= n_max; ++m) {
          if (m == n)
            diag = max_abs<R>(Mat<R>(G[n][m] - sys_.Cinv[n]));
          else
            off = std::max(off, max_abs<R>(G[n][m]));
        }
        // both scaled by ‖Cₙ⁻¹‖ rather than max(1, ·)
        add("biorthogonality", n, std::nullopt, "off_diagonal", {off / cn, 0});
        add("biorthogonality", n, std::nullopt, "diagonal", {diag / cn, 0});
      }
    }
    if (on("moment_cross_oracle")) {
      const int K = std::min(table_.size(), oracle_.size());
      for (int k = 0; k < K; ++k) {
        const R diff = max_abs<R>(Mat<R>(table_[k] - oracle_[k]));
        const R scale = std::max(R(1), max_abs<R>(table_[k]));
        const R est = table_.err_est[k] + oracle_.err_est[k];
        const double tol = static_cast<double>(std::max(R(10) * est / scale, R(1e-9)));
        add("moment_cross_oracle", k, std::nullopt, "", {diff, max_abs<R>(table_[k])}, tol);
      }
    }
    if (on("recurrence"))
      for (int n = 0; n <= n_max - 1; ++n)
        for (bool left : {true, false}) {
          const auto res = recurrence_residual<R>(sys_, n, left);
          R scale = std::max(sys_.PL[n + 1].max_coeff(), sys_.PR[n + 1].max_coeff());
          if (n >= 1)
            scale = std::max(scale, (left ? sys_.gammaL[n] : sys_.gammaR[n]).cwiseAbs().maxCoeff() *
                                        (left ? sys_.PL[n - 1] : sys_.PR[n - 1]).max_coeff());
          add("recurrence", n, std::nullopt, left ? "left" : "right", {res.max_coeff(), scale});
        }
    if (on("normalization_consistency"))
      for (int n = 0; n <= n_max; ++n)
        add("normalization_consistency", n, std::nullopt, "",
            {max_abs<R>(Mat<R>(sys_.Cinv[n] - sys_.Cinv_right[n])), max_abs<R>(sys_.Cinv[n])});
  }

  void weight_checks() {
    if (on("boundary_conditions")) {
      const auto rep = check_boundary_conditions<R>(model_, R(check_info("boundary_conditions").tolerance));
      for (const auto& c : rep.conditions) {
        CheckRecord rec;
        rec.check = "boundary_conditions";
        rec.side = c.name;
        rec.raw = static_cast<double>(std::max(std::abs(c.near_zero_limit), std::abs(c.near_infinity_limit)));
        rec.residual = rec.raw;
        rec.tolerance = check_info("boundary_conditions").tolerance;
        rec.pass = c.pass;
        out_.records.push_back(rec);
      }
    }
    if (on("weight_second_order"))
      for (R x : {R(0.5), R(1), R(2)}) {
        const auto [rl, rr] = weight_second_order_residual<R>(model_, x);
        const R w = max_abs<R>(model_.eval(x));
        add("weight_second_order", 0, Cx<R>(x), "left", {max_abs<R>(rl), w});
        add("weight_second_order", 0, Cx<R>(x), "right", {max_abs<R>(rr), w});
      }
  }

  void polynomial_checks() {
    const auto& p = model_.pearson();
    for (int n = 1; n <= opt_.n_max; ++n) {
      if (on("structure_forms")) {
        const auto a = structure_matrix_explicit<R>(sys_, p, n, Side::Left, StructureForm::Entries);
        const auto b = structure_matrix_explicit<R>(sys_, p, n, Side::Left, StructureForm::Expansion);
        add("structure_forms", n, std::nullopt, "",
            {(a.Mtilde - b.Mtilde).max_coeff(), std::max(a.Mtilde.max_coeff(), b.Mtilde.max_coeff())});
      }
      if (on("zero_curvature"))
        for (Side s : {Side::Left, Side::Right})
          add("zero_curvature", n, std::nullopt, to_string(s),
              zero_curvature_residual<R>(sys_, p, n, s).residual());
      if (on("polynomial_ode")) {
        add("polynomial_ode", n, std::nullopt, "first_order",
            first_order_polynomial_residual<R>(sys_, p, n).residual());
        add("polynomial_ode", n, std::nullopt, "second_order",
            second_order_polynomial_residual<R>(sys_, p, n).residual());
      }
    }
  }

  // Scalar x^α e^{−x} in Durán–Grünbaum form.
  std::optional<R> laguerre_alpha() const {
    if (model_.kind() != EvaluatorKind::DuranGrunbaum || model_.dim() != 1) return std::nullopt;
    const Cx<R> a1 = model_.A1()(0, 0), a2 = model_.A2()(0, 0);
    if (a1 + a2 != Cx<R>(-1) || model_.alpha()(0, 0).imag() != R(0)) return std::nullopt;
    return model_.alpha()(0, 0).real();
  }

  void ring_checks() {
    const bool any = on("determinant") || on("corollary") || on("inverse_consistency") ||
                     on("transfer") || on("first_order_ode") || on("second_order_ode") ||
                     on("scalar_laguerre");
    if (!any) return;
    const auto& p = model_.pearson();
    const int n_max = opt_.n_max;
    const auto lag = laguerre_alpha();
    if (on("scalar_laguerre") && !lag) skip("scalar_laguerre", "model is not a scalar Laguerre weight");
    if (on("scalar_laguerre") && lag)
      for (int n = 1; n <= n_max; ++n)
        add("scalar_laguerre", n, std::nullopt, "P", laguerre_p_residual<R>(sys_, n, *lag).residual());

    std::vector<StructureMatrix<R>> mL, mR;
    if (on("first_order_ode") || on("second_order_ode"))
      for (int n = 1; n <= n_max; ++n) {
        mL.push_back(structure_matrix_explicit<R>(sys_, p, n, Side::Left));
        mR.push_back(structure_matrix_explicit<R>(sys_, p, n, Side::Right));
      }
    SecondKindEvaluator<R> ev(model_, sys_, static_cast<R>(opt_.rel_tol), opt_.parallel);
    for (const Cx<R> z : z_ring<R>()) {
      const auto q = ev.evaluate(z, 0, n_max + 1, 2);
      for (int n = 1; n <= n_max; ++n) {
        const auto fL = make_frame<R>(sys_, q, n, Side::Left, z);
        const auto fR = make_frame<R>(sys_, q, n, Side::Right, z);
        if (on("determinant")) {
          add("determinant", n, z, "left", {det_residual<R>(fL), 0});
          add("determinant", n, z, "right", {det_residual<R>(fR), 0});
        }
        if (on("corollary")) {
          const auto c = corollary_identities<R>(sys_, q, n, z);
          for (int k = 0; k < 3; ++k) add("corollary", n, z, "identity_" + std::to_string(k + 1), c[k]);
        }
        if (on("inverse_consistency"))
          add("inverse_consistency", n, z, "", inverse_consistency<R>(sys_, q, n, z));
        if (on("transfer"))
          for (Side s : {Side::Left, Side::Right})
            add("transfer", n, z, to_string(s), transfer_residual<R>(sys_, q, n, s, z));
        if (on("first_order_ode")) {
          add("first_order_ode", n, z, "left", first_order_ode_residual<R>(fL, p, mL[n - 1]));
          add("first_order_ode", n, z, "right", first_order_ode_residual<R>(fR, p, mR[n - 1]));
        }
        if (on("second_order_ode")) {
          add("second_order_ode", n, z, "left", second_order_ode_residual<R>(fL, p, mL[n - 1]));
          add("second_order_ode", n, z, "right", second_order_ode_residual<R>(fR, p, mR[n - 1]));
        }
        if (on("scalar_laguerre") && lag)
          add("scalar_laguerre", n, z, "Q", laguerre_q_residual<R>(q, n, *lag, z));
      }
    }
  }

  // Checks that difference Z_n numerically; a smaller point set keeps the cost bounded.
  void pointwise_checks() {
    const bool any = on("structure_numeric") || on("laurent_residue") || on("constant_jump") ||
                     on("right_structure");
    if (!any) return;
    const auto& p = model_.pearson();
    SecondKindEvaluator<R> ev(model_, sys_, static_cast<R>(opt_.rel_tol), opt_.parallel);
    const auto ring = z_ring<R>();
    const std::vector<Cx<R>> pts(ring.begin(), ring.begin() + 10);
    for (int n = 1; n <= opt_.n_max; ++n) {
      const auto mL = structure_matrix_explicit<R>(sys_, p, n, Side::Left);
      for (const Cx<R> z : pts) {
        if (on("structure_numeric")) {
          const auto num = structure_matrix_numeric<R>(ev, n, Side::Left, z);
          const auto ex = mL.at(z);
          add("structure_numeric", n, z, "left", {(num - ex).max_abs(), ex.max_abs()});
        }
        if (on("constant_jump")) add("constant_jump", n, z, "", zlr_residual<R>(ev, n, z));
        if (on("right_structure"))
          add("right_structure", n, z, "", right_structure_relation<R>(ev, n, z));
      }
      if (on("laurent_residue"))
        for (const R r : {R(0.1), R(0.05)}) {
          const auto res = laurent_residue<R>(ev, n, Side::Left, r);
          add("laurent_residue", n, Cx<R>(r), "left",
              {(res - mL.pole_residue).max_abs(), mL.pole_residue.max_abs()});
        }
    }
  }

  void eigen_checks() {
    const auto& p = model_.pearson();
    if (on("adjointness")) {
      const int d = 3;
      add("adjointness", d, std::nullopt, "", adjointness_check<R>(model_, table_, d, d));
    }
    if (!on("eigenvalue")) return;
    const int N = model_.dim();
    Mat<R> aL = zeros<R>(N), aR = zeros<R>(N);
    if (opt_.eigen_alpha) {
      aL = opt_.eigen_alpha->first.template cast<Cx<R>>();
      aR = opt_.eigen_alpha->second.template cast<Cx<R>>();
      if (aL.rows() != N || aR.rows() != N) throw Error(ErrorKind::Shape, "eigen_alpha size");
    }
    if (p.degree() != 1) return skip("eigenvalue", "needs degree-one Pearson data");
    for (R x : {R(0.5), R(1), R(2)}) {
      const R h = max_abs<R>(hidden_constraint_residual<R>(model_, aL, aR, x));
      if (h > R(1e-10) * std::max(R(1), max_abs<R>(model_.eval(x))))
        return skip("eigenvalue", "the supplied alpha does not satisfy the compatibility constraint");
    }
    for (int n = 1; n <= opt_.n_max; ++n) {
      EigenReport<R> rep;
      try {
        rep = eigenvalue_check<R>(sys_, p, n, aL, aR, std::numeric_limits<R>::infinity());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidModel) throw;
        return skip("eigenvalue", e.what());
      }
      add("eigenvalue", n, std::nullopt, "left", rep.left);
      add("eigenvalue", n, std::nullopt, "right", rep.right);
      add("eigenvalue", n, std::nullopt, "intertwining", rep.intertwining);
    }
  }

  void painleve_checks() {
    const auto d = make_dpiv_data<R>(sys_, model_.pearson());
    const int n_max = opt_.n_max;
    if (on("dpiv"))
      for (int n = 1; n <= n_max; ++n) {
        const auto r = dpiv_residuals<R>(d, n);
        add("dpiv", n, std::nullopt, "first", r.r1);
        add("dpiv", n, std::nullopt, "second", r.r2);
      }
    const bool ghr = on("ghr") && max_abs<R>(d.B()) == R(0);
    if (on("ghr") && !ghr) skip("ghr", "needs B = 0");
    if (!(on("xi_mu") || ghr)) return;
    try {
      for (int n = 1; n <= n_max; ++n) {
        if (on("xi_mu")) {
          const auto x = commutative_xi_mu<R>(d, n);
          add("xi_mu", n, std::nullopt, "sum", x.sum);
          add("xi_mu", n, std::nullopt, "square", x.dpiv);
        }
        if (ghr) add("ghr", n, std::nullopt, "", ghr_instance_residual<R>(d, n));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CommutativityViolation) throw;
      for (auto it = out_.records.begin(); it != out_.records.end();)
        it = (it->check == "xi_mu" || it->check == "ghr") ? out_.records.erase(it) : it + 1;
      if (on("xi_mu")) skip("xi_mu", "recursion data do not commute");
      if (ghr) skip("ghr", "recursion data do not commute");
    }
  }

  const WeightModel<R>& model_;
  const SuiteOptions& opt_;
  std::set<std::string> selected_;
  int n_build_ = 0;
  MomentTable<R> table_, oracle_;
  BiorthSystem<R> sys_;
  SuiteResult out_;
};

}  // namespace

template <class R>
SuiteResult run_suite(const WeightModel<R>& model, const SuiteOptions& opt) {
  return Runner<R>(model, opt).run();
}

template SuiteResult run_suite<double>(const WeightModel<double>&, const SuiteOptions&);
template SuiteResult run_suite<long double>(const WeightModel<long double>&, const SuiteOptions&);

}  // namespace matbiorth
