#include "test_support.hpp"

#include "matbiorth/biorth.hpp"
#include "matbiorth/corpus.hpp"

using namespace testing;
namespace corpus = matbiorth::corpus;

namespace {

struct Built {
  MomentTable<double> table;
  BiorthSystem<double> sys;
};

Built build(const WeightModel<double>& m, int n_max) {
  auto t = moments_by_quadrature<double>(m, 2 * n_max + 3);
  auto s = build_biorth<double>(t, n_max);
  return {std::move(t), std::move(s)};
}

double re(const Md& a) { return a(0, 0).real(); }

}  // namespace

TEST_CASE("scalar e^{-x}: first polynomials and normalizations") {
  const auto b = build(corpus::laguerre<double>(0), 3);
  CHECK(diff(b.sys.PL[1].coeff(0), m1(-1)) < 1e-12);
  CHECK(diff(b.sys.PL[1].coeff(1), m1(1)) < 1e-14);
  CHECK(diff(b.sys.C[0], m1(1)) < 1e-12);
  CHECK(diff(b.sys.Cinv[1], m1(1)) < 1e-12);
  CHECK(diff(b.sys.qL1[0], m1(1)) < 1e-12);
  CHECK(diff(Md(-b.sys.p1R(1)), m1(1)) < 1e-12);
}

TEST_CASE("classical Laguerre recursion coefficients") {
  SUBCASE("alpha = 0 through n = 8") {
    const auto b = build(corpus::laguerre<double>(0), 9);
    for (int n = 0; n <= 8; ++n) {
      CHECK(re(b.sys.betaL[n]) == doctest::Approx(2 * n + 1).epsilon(1e-8));
      CHECK(re(b.sys.gammaL[n]) == doctest::Approx(double(n) * n).epsilon(1e-8));
    }
  }
  SUBCASE("alpha = 1/2") {
    const auto b = build(corpus::laguerre<double>(0.5), 6);
    CHECK(re(b.sys.betaL[0]) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(re(b.sys.qL1[0]) == doctest::Approx(1.5).epsilon(1e-12));
    for (int n = 0; n < 6; ++n) {
      CHECK(re(b.sys.betaL[n]) == doctest::Approx(2 * n + 1.5).epsilon(1e-9));
      CHECK(re(b.sys.gammaL[n]) == doctest::Approx(n * (n + 0.5)).epsilon(1e-9));
    }
  }
}

TEST_CASE("diagonal weight decouples") {
  const auto b = build(corpus::diag_laguerre<double>(), 5);
  for (int n = 0; n < 5; ++n) {
    Md expect = Md::Zero(2, 2);
    expect(0, 0) = 2 * n + 1;
    expect(1, 1) = 2 * n + 1.5;
    CHECK(diff(b.sys.betaL[n], expect) < 1e-9 * (2 * n + 2));
  }
}

TEST_CASE("normalization and recursion invariants") {
  for (const auto& e : corpus::standard<double>()) {
    INFO(e.name);
    const auto b = build(e.model, 5);
    const auto& s = b.sys;
    for (int n = 0; n <= 5; ++n) {
      CHECK(s.PL[n].is_monic(1e-12));
      CHECK(s.PR[n].trimmed().degree() == n);
      CHECK(diff(s.Cinv[n], s.Cinv_right[n]) <= 1e-9 * max_abs<double>(s.Cinv[n]));
    }
    for (int n = 1; n <= 5; ++n) {
      CHECK(diff(s.gammaL[n], Md(s.Cinv[n] * s.C[n - 1])) <= 1e-9 * max_abs<double>(s.gammaL[n]));
      CHECK(diff(s.gammaR[n], Md(s.C[n - 1] * s.Cinv[n])) <= 1e-9 * max_abs<double>(s.gammaR[n]));
    }
    for (int n = 0; n < 5; ++n) {
      CHECK(diff(s.betaR[n], Md(s.C[n] * s.betaL[n] * s.Cinv[n])) <= 1e-8 * max_abs<double>(s.betaR[n]));
      for (bool left : {true, false}) {
        const auto r = recurrence_residual<double>(s, n, left);
        CHECK(r.max_coeff() <= 1e-8 * std::max(1.0, s.PL[n + 1].max_coeff()));
      }
    }
    for (int n = 1; n <= 5; ++n) {
      CHECK(diff(s.p1R(n), Md(-s.qL1[n - 1])) <= 1e-8 * std::max(1.0, max_abs<double>(s.qL1[n - 1])));
      CHECK(diff(s.p1L(n), Md(-s.qR1[n - 1])) <= 1e-8 * std::max(1.0, max_abs<double>(s.qR1[n - 1])));
    }
  }
}

TEST_CASE("biorthogonality by moment contraction and by direct quadrature") {
  for (const auto& e : corpus::standard<double>()) {
    INFO(e.name);
    const auto b = build(e.model, 4);
    const auto G = gram_by_quadrature<double>(e.model, b.sys, 4);
    for (int n = 0; n <= 4; ++n)
      for (int m = 0; m <= 4; ++m) {
        const double scale = max_abs<double>(b.sys.Cinv[n]);
        const Md target = n == m ? b.sys.Cinv[n] : zeros<double>(2 * 0 + b.sys.dim);
        CHECK(diff(sesquilinear<double>(b.sys.PL[n], b.sys.PR[m], b.table), target) <= 1e-9 * scale);
        CHECK(diff(G[n][m], target) <= 1e-9 * scale);
      }
  }
}

TEST_CASE("symmetric weight: right family is the transpose") {
  const auto b = build(corpus::dg_commuting<double>(), 5);
  for (int n = 0; n <= 5; ++n)
    CHECK(max_coeff_diff<double>(b.sys.PR[n], b.sys.PL[n].transpose()) <= 1e-10 * b.sys.PL[n].max_coeff());
}

TEST_CASE("Hermitian weight: right family is the adjoint") {
  const auto b = build(corpus::dg_hermitian<double>(), 5);
  for (int n = 0; n <= 5; ++n)
    for (double x : {-1.0, 0.5, 3.0})
      CHECK(diff(b.sys.PR[n](Cd(x)), Md(b.sys.PL[n](Cd(x)).adjoint())) <=
            1e-10 * std::max(1.0, max_abs<double>(b.sys.PL[n](Cd(x)))));
}

TEST_CASE("scale invariance") {
  const auto m = corpus::dg_commuting<double>();
  const auto a = build(m, 4), b = build(m.scaled(2.0), 4);
  for (int n = 0; n <= 4; ++n) {
    CHECK(max_coeff_diff<double>(a.sys.PL[n], b.sys.PL[n]) <= 1e-10 * a.sys.PL[n].max_coeff());
    CHECK(max_coeff_diff<double>(a.sys.PR[n], b.sys.PR[n]) <= 1e-10 * a.sys.PR[n].max_coeff());
    CHECK(diff(b.sys.Cinv[n], Md(2.0 * a.sys.Cinv[n])) <= 1e-10 * max_abs<double>(b.sys.Cinv[n]));
    CHECK(diff(a.sys.gammaL[n], b.sys.gammaL[n]) <= 1e-10 * std::max(1.0, max_abs<double>(a.sys.gammaL[n])));
  }
  for (int n = 0; n < 4; ++n)
    CHECK(diff(a.sys.betaL[n], b.sys.betaL[n]) <= 1e-10 * max_abs<double>(a.sys.betaL[n]));
}

TEST_CASE("second-kind functions") {
  const auto model = corpus::laguerre<double>(0);
  const auto b = build(model, 3);
  const SecondKindEvaluator<double> ev(model, b.sys);
  // e·E₁(1) = −e·Ei(−1)
  const double oracle = -std::exp(1.0) * std::expint(-1.0);
  CHECK(ev.left(0, Cd(-1))(0, 0).real() == doctest::Approx(oracle).epsilon(1e-11));
  CHECK(std::abs(ev.left(0, Cd(-1))(0, 0).imag()) < 1e-14);
  CHECK(diff(ev.right(0, Cd(-1)), ev.left(0, Cd(-1))) < 1e-15);

  try {
    ev.left(1, Cd(1, 1e-3));
    FAIL("expected TooCloseToSupport");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooCloseToSupport);
  }
}

TEST_CASE("second-kind functions follow the asymptotic series far from the origin") {
  // The series diverges for exponential decay: the best truncation is only as good as its
  // smallest term, so the bound is 1e−6 or that term, whichever is larger.
  for (const auto& e : corpus::standard<double>()) {
    INFO(e.name);
    const auto table = moments_by_quadrature<double>(e.model, 40);
    const auto sys = build_biorth<double>(table, 3);
    const SecondKindEvaluator<double> ev(e.model, sys);
    for (int n = 0; n <= 3; ++n)
      for (Cd z : {Cd(-10.0 * (n + 1), 0), Cd(0, 10.0 * (n + 1)), 10.0 * (n + 1) * std::polar(1.0, 0.75 * M_PI)}) {
        INFO("n = " << n << ", z = " << z);
        const Md q = ev.left(n, z);
        const double qn = max_abs<double>(q);
        double best = 1e300, bound = 0;
        for (int K = n; K + n + 2 <= table.size(); ++K) {
          const Md a = second_kind_asymptotic<double>(sys, table.prefix(K + n + 1), n, z);
          const Md next = second_kind_asymptotic<double>(sys, table.prefix(K + n + 2), n, z);
          const double err = diff(q, a) / qn;
          if (err < best) {
            best = err;
            bound = diff(next, a) / qn;
          }
        }
        CHECK(best <= std::max(1e-6, 2 * bound));
      }
    // Gaussian decay: the series itself is good to 1e−6 at this radius
    if (e.model.kind() == EvaluatorKind::FreudRay)
      for (int n = 0; n <= 3; ++n) {
        const Cd z(0, 10.0 * (n + 1));
        const Md q = ev.left(n, z);
        CHECK(diff(q, second_kind_asymptotic<double>(sys, table, n, z)) <= 1e-6 * max_abs<double>(q));
      }
  }
}

TEST_CASE("second-kind leading term at |z| = 1e6") {
  // Beyond degree 1 the Cauchy integral cancels below double precision at this radius.
  for (const auto& e : corpus::standard<double>()) {
    INFO(e.name);
    const auto b = build(e.model, 1);
    const SecondKindEvaluator<double> ev(e.model, b.sys);
    const Cd z(-1e6, 1e3);
    for (int n = 0; n <= 1; ++n) {
      const Md lead = ev.left(n, z) * std::pow(z, n + 1);
      CHECK(diff(lead, Md(-b.sys.Cinv[n])) <= 1e-5 * max_abs<double>(b.sys.Cinv[n]));
    }
  }
}

TEST_CASE("left and right families are solved independently") {
  // a corrupted table still yields consistent normalizations on each side but breaks the cross-check
  auto t = moments_by_quadrature<double>(corpus::freud_noncommuting<double>(), 9);
  const auto good = build_biorth<double>(t, 3);
  t.moments[3] *= 1.001;
  const auto bad = build_biorth<double>(t, 3);
  const auto G = gram_by_quadrature<double>(corpus::freud_noncommuting<double>(), bad, 3);
  double worst = 0;
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m < n; ++m) worst = std::max(worst, max_abs<double>(G[n][m]) / max_abs<double>(good.Cinv[n]));
  CHECK(worst > 1e-6);
}
