#include "test_support.hpp"

#include "matbiorth/corpus.hpp"
#include "matbiorth/rhp.hpp"

using namespace testing;
namespace corpus = matbiorth::corpus;

namespace {

struct Fixture {
  WeightModel<double> model;
  MomentTable<double> table;
  BiorthSystem<double> sys;
  SecondKindEvaluator<double> ev;

  Fixture(WeightModel<double> m, int n_max)
      : model(std::move(m)),
        table(moments_by_quadrature<double>(model, 2 * n_max + 3)),
        sys(build_biorth<double>(table, n_max)),
        ev(model, sys) {}
  Fixture(const Fixture&) = delete;

  FundamentalFrame<double> frame(int n, Side side, Cd z) const {
    return make_frame<double>(sys, ev.evaluate(z, n - 1, n, 2), n, side, z);
  }
};

const Fixture& laguerre0() {
  static const Fixture f(corpus::laguerre<double>(0), 3);
  return f;
}

const Fixture& dg() {
  static const Fixture f(corpus::dg_commuting<double>(), 3);
  return f;
}

const Fixture& freud() {
  static const Fixture f(corpus::freud_noncommuting<double>(), 3);
  return f;
}

}  // namespace

TEST_CASE("z-ring") {
  const auto ring = z_ring<double>();
  REQUIRE(ring.size() == 21);
  for (Cd z : ring) CHECK(distance_to_support<double>(z) > 0.01);
}

TEST_CASE("fundamental matrix: determinant and normalization") {
  const auto& f = laguerre0();
  CHECK(det_residual<double>(f.frame(1, Side::Left, Cd(-1))) < 1e-8);
  CHECK(det_residual<double>(f.frame(1, Side::Right, Cd(-1))) < 1e-8);
  for (const Fixture* fx : {&dg(), &freud()})
    for (Cd z : {Cd(-1, 1), Cd(2, -2)})
      for (Side s : {Side::Left, Side::Right}) CHECK(det_residual<double>(fx->frame(2, s, z)) < 1e-7);

  // Y·diag(z^{−n}, zⁿ) → I at rate 1/z
  const double r1 = normalization_residual<double>(f.frame(1, Side::Left, Cd(-50, 50)));
  const double r2 = normalization_residual<double>(f.frame(1, Side::Left, Cd(-500, 500)));
  CHECK(r2 < r1 / 5);
  CHECK(r2 < 1e-2);
}

TEST_CASE("left and right fundamental matrices are mutually inverse") {
  for (Cd z : {Cd(-1, 0), Cd(1, 2)}) {
    const auto q = dg().ev.evaluate(z, 1, 2, 0);
    CHECK(inverse_consistency<double>(dg().sys, q, 2, z).relative() < 1e-7);
  }
}

TEST_CASE("corollary identities") {
  SUBCASE("scalar e^{-x}, n = 1, z = -2") {
    const Cd z(-2);
    const auto q = laguerre0().ev.evaluate(z, 0, 1, 0);
    for (const auto& r : corollary_identities<double>(laguerre0().sys, q, 1, z)) CHECK(r.relative() < 1e-8);
  }
  SUBCASE("commuting 2x2, n = 1, z = -1 + i") {
    const Cd z(-1, 1);
    const auto q = dg().ev.evaluate(z, 0, 1, 0);
    for (const auto& r : corollary_identities<double>(dg().sys, q, 1, z)) CHECK(r.relative() < 1e-7);
  }
  SUBCASE("perturbed C_{n-1}^{-1}: residual tracks the perturbation") {
    const Cd z(-1, 1);
    const int n = 2;
    const auto q = dg().ev.evaluate(z, n - 1, n, 0);
    const double eps = 1e-4;
    const Md bad = dg().sys.Cinv[n - 1] * (1 + eps);
    const auto r = corollary_identities<double>(dg().sys, q, n, z, &bad);
    const double injected = eps * max_abs<double>(dg().sys.Cinv[n - 1]);
    CHECK(r[0].raw > injected / 10);
    CHECK(r[0].raw < injected * 10);
    CHECK(r[2].relative() < 1e-7);  // the third identity does not involve C
  }
}

TEST_CASE("transfer matrices") {
  const auto& f = laguerre0();
  const Cd z(-1);
  const auto q = f.ev.evaluate(z, 0, 2, 0);
  CHECK(transfer_residual<double>(f.sys, q, 1, Side::Left, z).relative() < 1e-7);
  CHECK(transfer_residual<double>(f.sys, q, 1, Side::Right, z).relative() < 1e-7);
  for (int n = 0; n < 3; ++n)
    for (Side s : {Side::Left, Side::Right})
      CHECK(std::abs(transfer_matrix<double>(freud().sys, n, s, Cd(0.3, 2)).determinant() - 1.0) < 1e-10);

  const Cd w(1, -1);
  const auto qf = freud().ev.evaluate(w, 1, 3, 0);
  for (Side s : {Side::Left, Side::Right})
    CHECK(transfer_residual<double>(freud().sys, qf, 2, s, w).relative() < 1e-7);
}

TEST_CASE("structure matrix entries") {
  SUBCASE("scalar Laguerre: (1,1) entry is -z/2 + n + alpha/2") {
    const double alpha = 0.5;
    const Fixture f(corpus::laguerre<double>(alpha), 4);
    for (int n = 1; n <= 4; ++n) {
      const auto m = structure_matrix_explicit<double>(f.sys, f.model.pearson(), n);
      CHECK(m.Mtilde.coeff(0)(0, 0).real() == doctest::Approx(n + alpha / 2).epsilon(1e-9));
      CHECK(m.Mtilde.coeff(1)(0, 0).real() == doctest::Approx(-0.5).epsilon(1e-12));
      CHECK(m.Mtilde.trimmed(1e-12).degree() <= 1);
    }
  }
  SUBCASE("degree-one data: (2,1) block is -C_{n-1}A1 - A2 C_{n-1}") {
    const auto& f = dg();
    const Md A1 = f.model.A1(), A2 = f.model.A2();
    for (int n = 1; n <= 3; ++n) {
      const auto m = structure_matrix_explicit<double>(f.sys, f.model.pearson(), n);
      const Md C = f.sys.C[n - 1];
      const Md lower = m.Mtilde.coeff(0).block(2, 0, 2, 2);
      CHECK(diff(lower, Md(-C * A1 - A2 * C)) <= 1e-9 * max_abs<double>(C));
    }
  }
  SUBCASE("entry formulas and the large-z expansion agree") {
    for (const Fixture* fx : {&dg(), &freud()})
      for (int n = 1; n <= 3; ++n) {
        const auto a = structure_matrix_explicit<double>(fx->sys, fx->model.pearson(), n, Side::Left,
                                                         StructureForm::Entries);
        const auto b = structure_matrix_explicit<double>(fx->sys, fx->model.pearson(), n, Side::Left,
                                                         StructureForm::Expansion);
        CHECK(max_coeff_diff<double>(a.Mtilde, b.Mtilde) <= 1e-8 * std::max(1.0, a.Mtilde.max_coeff()));
      }
  }
}

TEST_CASE("structure matrix: explicit vs numerical logarithmic derivative") {
  const auto& f = laguerre0();
  const auto m = structure_matrix_explicit<double>(f.sys, f.model.pearson(), 1);
  for (Cd z : {Cd(-1), Cd(-1, 1)}) {
    const Md num = structure_matrix_numeric<double>(f.ev, 1, Side::Left, z).dense();
    CHECK(diff(num, m.Mtilde(z)) < 1e-6 * std::max(1.0, max_abs<double>(m.Mtilde(z))));
  }
  const auto mf = structure_matrix_explicit<double>(freud().sys, freud().model.pearson(), 2);
  const Cd z(0.5, 1.5);
  const Md num = structure_matrix_numeric<double>(freud().ev, 2, Side::Left, z).dense();
  CHECK(diff(num, mf.Mtilde(z)) < 1e-6 * std::max(1.0, max_abs<double>(mf.Mtilde(z))));
}

TEST_CASE("structure matrix: simple pole at the origin") {
  const auto& f = dg();
  const auto m = structure_matrix_explicit<double>(f.sys, f.model.pearson(), 2);
  const Md expect = m.pole_residue.dense();
  CHECK(diff(expect, m.Mtilde(Cd(0))) < 1e-12 * std::max(1.0, max_abs<double>(expect)));
  const Md fit = laurent_residue<double>(f.ev, 2, Side::Left, 0.1).dense();
  CHECK(diff(fit, expect) < 1e-5 * std::max(1.0, max_abs<double>(expect)));
}

TEST_CASE("zero curvature") {
  const auto& f = laguerre0();
  for (Side s : {Side::Left, Side::Right})
    CHECK(zero_curvature_residual<double>(f.sys, f.model.pearson(), 1, s).residual().relative() < 1e-8);
  for (int n = 1; n <= 2; ++n)
    for (Side s : {Side::Left, Side::Right})
      CHECK(zero_curvature_residual<double>(freud().sys, freud().model.pearson(), n, s).residual().relative() <
            1e-7);

  // perturbed C_n (negative control): the identity breaks at the level of the perturbation
  auto bad = freud().sys;
  const double eps = 1e-5;
  bad.Cinv[2] *= 1 + eps;
  bad.C[2] = bad.Cinv[2].inverse();
  const double r = zero_curvature_residual<double>(bad, freud().model.pearson(), 2).residual().raw;
  CHECK(r > eps * 1e-2);
  CHECK(r < eps * 1e3);
}

TEST_CASE("N-transform") {
  // N(z) = 1 + z
  const auto z1 = n_transform<double>(MatrixPolynomial<double>({m1(0), m1(1)}));
  CHECK_FALSE(z1.has_pole());
  CHECK(diff(z1(Cd(2, 1)), m1(Cd(3, 1))) < 1e-15);

  // N(Az + B) = A + (Az + B)²/z with a pole iff B² ≠ 0
  const Md A = m2(1, 2, 0, -1), B = m2(0, 1, 0, 0);  // B² = 0
  const auto nb = n_transform<double>(MatrixPolynomial<double>({B, A}));
  CHECK_FALSE(nb.has_pole());
  const Cd w(0.7, -0.4);
  const Md F = A * w + B;
  CHECK(diff(nb(w), Md(A + F * F / w)) < 1e-13);
  const auto np = n_transform<double>(MatrixPolynomial<double>({eye<double>(2), A}));
  CHECK(np.has_pole());
  CHECK(diff(np.residue, eye<double>(2)) < 1e-15);

  // scalar Laguerre hᴸ = α/2 − z/2
  const double alpha = 0.5;
  const auto nl = n_transform<double>(corpus::laguerre<double>(alpha).pearson().hL);
  for (Cd z : {Cd(1), Cd(-2, 3)}) {
    const Cd h = alpha / 2 - z / 2.0;
    CHECK(std::abs(nl(z)(0, 0) - (-0.5 + h * h / z)) < 1e-14);
  }

  const std::function<Md(Cd)> id = [](Cd z) { return m1(z); };
  try {
    n_transform<double>(id, Cd(0));
    FAIL("expected PoleAtZero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleAtZero);
  }
}

TEST_CASE("first- and second-order ODEs for the fundamental matrix") {
  const auto& f = laguerre0();
  const auto& p = f.model.pearson();
  for (Side s : {Side::Left, Side::Right}) {
    const auto fr = f.frame(1, s, Cd(-1));
    const auto m = structure_matrix_explicit<double>(f.sys, p, 1, s);
    CHECK(first_order_ode_residual<double>(fr, p, m).relative() < 1e-6);
    CHECK(second_order_ode_residual<double>(fr, p, m).relative() < 1e-5);
  }
  for (Side s : {Side::Left, Side::Right}) {
    const auto fr = freud().frame(2, s, Cd(-0.5, 1));
    const auto m = structure_matrix_explicit<double>(freud().sys, freud().model.pearson(), 2, s);
    CHECK(first_order_ode_residual<double>(fr, freud().model.pearson(), m).relative() < 1e-6);
    CHECK(second_order_ode_residual<double>(fr, freud().model.pearson(), m).relative() < 1e-5);
  }

  // wrong sign on hᴿ: O(1) residual
  auto wrong = p;
  wrong.hR = -wrong.hR;
  const auto fr = f.frame(1, Side::Left, Cd(-1));
  const auto m = structure_matrix_explicit<double>(f.sys, p, 1);
  CHECK(first_order_ode_residual<double>(fr, wrong, m).relative() > 0.1);
}

TEST_CASE("split polynomial equations for P_n") {
  for (const Fixture* fx : {&laguerre0(), &dg(), &freud()})
    for (int n = 1; n <= 3; ++n) {
      CHECK(first_order_polynomial_residual<double>(fx->sys, fx->model.pearson(), n).residual().relative() < 1e-8);
      CHECK(second_order_polynomial_residual<double>(fx->sys, fx->model.pearson(), n).residual().relative() < 1e-8);
    }
}

TEST_CASE("scalar Laguerre equations") {
  const double alpha = 0.5;
  const Fixture f(corpus::laguerre<double>(alpha), 4);
  for (int n = 0; n <= 3; ++n) {
    CHECK(laguerre_p_residual<double>(f.sys, n, alpha).residual().relative() < 1e-8);
    const Cd z(-1, 1);
    CHECK(laguerre_q_residual<double>(f.ev.evaluate(z, n, n, 2), n, alpha, z).relative() < 1e-6);
  }
}

TEST_CASE("eigenvalue problem") {
  const auto& f = dg();
  const auto& p = f.model.pearson();
  const Md zero = zeros<double>(2);
  for (double x : {0.5, 1.0, 2.0}) CHECK(max_abs<double>(hidden_constraint_residual<double>(f.model, zero, zero, x)) < 1e-10);
  for (int n = 1; n <= 3; ++n) {
    const auto rep = eigenvalue_check<double>(f.sys, p, n, zero, zero);
    CHECK(rep.left.relative() < 1e-8);
    CHECK(rep.right.relative() < 1e-8);
    CHECK(rep.intertwining.relative() < 1e-8);
  }
  // scalar Laguerre: λₙ = −n
  const auto& l = laguerre0();
  for (int n = 1; n <= 3; ++n) {
    const auto rep = eigenvalue_check<double>(l.sys, l.model.pearson(), n, m1(0), m1(0));
    CHECK(rep.lambdaL(0, 0).real() == doctest::Approx(-n).epsilon(1e-9));
  }

  const Md alphaL = m2(0, 1, 0, 0);
  CHECK(max_abs<double>(hidden_constraint_residual<double>(f.model, alphaL, zero, 1.0)) > 1e-3);
  try {
    eigenvalue_check<double>(f.sys, p, 2, alphaL, zero);
    FAIL("expected NotEigenfunction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotEigenfunction);
  }
}

TEST_CASE("adjointness of the second-order operators") {
  for (const Fixture* fx : {&laguerre0(), &dg()})
    CHECK(adjointness_check<double>(fx->model, fx->table, 3, 3).relative() < 1e-7);
}

TEST_CASE("constant jump and right structure relations") {
  const auto& f = dg();
  const Cd z(-1, 1);
  CHECK(zlr_residual<double>(f.ev, 2, z).relative() < 1e-7);
  CHECK(right_structure_relation<double>(f.ev, 2, z).relative() < 1e-6);
}
