#include "test_support.hpp"

#include "matbiorth/biorth.hpp"
#include "matbiorth/corpus.hpp"
#include "matbiorth/painleve.hpp"

using namespace testing;
namespace corpus = matbiorth::corpus;

namespace {

DPIVData<double> data_for(const WeightModel<double>& m, int n_build) {
  const auto t = moments_by_quadrature<double>(m, 2 * n_build + 3);
  return make_dpiv_data<double>(build_biorth<double>(t, n_build), m.pearson());
}

const DPIVData<double>& gauss() {
  static const auto d = data_for(corpus::scalar_freud<double>(1, -2), 8);
  return d;
}

const DPIVData<double>& noncommuting(bool with_B) {
  static const auto d0 = data_for(corpus::freud_noncommuting<double>(false), 6);
  static const auto d1 = data_for(corpus::freud_noncommuting<double>(true), 6);
  return with_B ? d1 : d0;
}

}  // namespace

TEST_CASE("dPIV residuals on scalar Gaussian-type weights") {
  const auto r = dpiv_residuals<double>(gauss(), 1);
  CHECK(r.r1.raw < 1e-8);
  CHECK(r.r2.raw < 1e-8);
  const auto half = data_for(corpus::scalar_freud<double>(0.5, -1), 5);
  const auto r2 = dpiv_residuals<double>(half, 2);
  CHECK(r2.r1.relative() < 1e-8);
  CHECK(r2.r2.relative() < 1e-8);
  // commuting data: the nonlocal commutator sides vanish
  for (int n = 1; n <= 5; ++n) {
    const auto rn = dpiv_residuals<double>(gauss(), n);
    CHECK(max_abs<double>(rn.nonlocal1) <= 1e-12);
    CHECK(max_abs<double>(rn.nonlocal2) <= 1e-12);
  }
}

TEST_CASE("dPIV residuals on the noncommuting 2x2 model") {
  for (bool with_B : {false, true})
    for (int n = 1; n <= 4; ++n) {
      INFO("B = " << with_B << ", n = " << n);
      const auto r = dpiv_residuals<double>(noncommuting(with_B), n);
      CHECK(r.r1.relative() < 1e-6);
      CHECK(r.r2.relative() < 1e-6);
      CHECK(max_abs<double>(r.nonlocal1) > 1e-3);  // the commutator terms matter here
    }
}

TEST_CASE("non-Abelian theorem equals dPIV with B = 0") {
  const auto& d = noncommuting(false);
  for (int n = 1; n <= 4; ++n) {
    const auto a = dpiv_residuals<double>(d, n), b = nonabelian_theorem_residuals<double>(d, n);
    CHECK(diff(a.R1, b.R1) <= 1e-14);
    CHECK(diff(a.R2, b.R2) <= 1e-14);
    CHECK(b.r1.relative() < 1e-6);
    CHECK(b.r2.relative() < 1e-6);
  }
  try {
    nonabelian_theorem_residuals<double>(noncommuting(true), 1);
    FAIL("expected InvalidModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidModel);
  }
}

TEST_CASE("cached partial sums match sums from scratch") {
  for (const auto* d : {&gauss(), &noncommuting(false), &noncommuting(true)})
    for (int n = 0; n <= 5; ++n) {
      const auto [S, p2] = partial_sums_from_scratch<double>(*d, n);
      CHECK(diff(S, d->S(n)) <= 1e-13 * std::max(1.0, max_abs<double>(S)));
      CHECK(diff(p2, d->p2(n)) <= 1e-13 * std::max(1.0, max_abs<double>(p2)));
    }
}

TEST_CASE("partial sums reproduce the subleading coefficients of P_n") {
  const auto m = corpus::freud_noncommuting<double>(true);
  const auto sys = build_biorth<double>(moments_by_quadrature<double>(m, 13), 5);
  const auto d = make_dpiv_data<double>(sys, m.pearson());
  for (int n = 1; n <= 5; ++n) {
    CHECK(diff(Md(-d.S(n)), sys.p1L(n)) <= 1e-8 * std::max(1.0, max_abs<double>(d.S(n))));
    CHECK(diff(d.p2(n), sys.p2L(n)) <= 1e-8 * std::max(1.0, max_abs<double>(d.p2(n))));
  }
}

TEST_CASE("commutative xi/mu reduction") {
  const auto& d = gauss();
  const auto x0 = commutative_xi_mu<double>(d, 0);
  CHECK(x0.xi(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(x0.mu(0, 0).real() == doctest::Approx(-std::sqrt(M_PI)).epsilon(1e-12));
  // β₀μ₀ = −(ξ₀ + ξ₁) with ξ₁ = 3/2 − 2γ₁
  const double b0 = d.beta()[0](0, 0).real(), g1 = d.gamma()[1](0, 0).real();
  CHECK(-2 * b0 * b0 == doctest::Approx(-(0.5 + 1.5 - 2 * g1)).epsilon(1e-10));
  for (int n = 1; n <= 3; ++n) {
    const auto x = commutative_xi_mu<double>(d, n);
    CHECK(x.sum.relative() < 1e-8);
    CHECK(x.dpiv.relative() < 1e-8);
  }
  try {
    commutative_xi_mu<double>(noncommuting(false), 1);
    FAIL("expected CommutativityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CommutativityViolation);
  }
}

TEST_CASE("diagonal 2x2 data decouple into scalar checks") {
  // diag(x e^{−x²}, x^{1/2} e^{−x²/2})
  const auto m = WeightModel<double>::freud_ray(m2(1, 0, 0, 0.5), zeros<double>(2), m2(-2, 0, 0, -1));
  const auto d = data_for(m, 5);
  const auto a = data_for(corpus::scalar_freud<double>(1, -2), 5);
  const auto b = data_for(corpus::scalar_freud<double>(0.5, -1), 5);
  for (int n = 1; n <= 3; ++n) {
    const auto x = commutative_xi_mu<double>(d, n);
    const auto xa = commutative_xi_mu<double>(a, n), xb = commutative_xi_mu<double>(b, n);
    CHECK(x.xi(0, 0).real() == doctest::Approx(xa.xi(0, 0).real()).epsilon(1e-9));
    CHECK(x.xi(1, 1).real() == doctest::Approx(xb.xi(0, 0).real()).epsilon(1e-9));
    CHECK(x.dpiv.relative() < 1e-8);
  }
}

TEST_CASE("GHR instance") {
  CHECK(ghr_instance_residual<double>(gauss(), 1).relative() < 1e-8);
  const auto d = data_for(corpus::scalar_freud<double>(1.5, -1), 5);
  CHECK(ghr_instance_residual<double>(d, 1).relative() < 1e-8);
  for (int n = 1; n <= 5; ++n) CHECK(ghr_instance_residual<double>(gauss(), n).relative() < 1e-7);

  // the factor with nI in place of (n+1)I does not give an identity
  CHECK(ghr_instance_residual<double>(gauss(), 1, GHRFactor::Printed).relative() > 1e-2);

  // perturbing γ₂ by 1e−3 shows up at that level, linearly
  auto perturbed = [](double eps, int n) {
    const auto bad = gauss().with_gamma(2, Md(gauss().gamma()[2] + m1(eps)));
    return ghr_instance_residual<double>(bad, n).relative();
  };
  for (int n = 0; n <= 2; ++n) {
    INFO("n = " << n);
    const double r = perturbed(1e-3, n);
    CHECK(r > 1e-4);
    CHECK(r < 1e-2);
    CHECK(r / perturbed(1e-4, n) == doctest::Approx(10).epsilon(0.05));
  }
}
