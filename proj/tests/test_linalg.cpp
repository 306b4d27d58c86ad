#include "test_support.hpp"

using namespace testing;

TEST_CASE("sylvester: scalar, identity and diagonal oracles") {
  CHECK(std::abs(solve_sylvester<double>(m1(2), m1(1), m1(3))(0, 0) - Cd(3)) < 1e-14);

  const Md R = m2(1, 2, 3, 4);
  CHECK(diff(solve_sylvester<double>(eye<double>(2), zeros<double>(2), R), R) < 1e-14);

  Md P = m2(3, 0, 0, 4), Q = eye<double>(2), Rh = m2(2, 2, 6, 3);
  // x_ij (p_j − q_i) = r_ij
  CHECK(diff(solve_sylvester<double>(P, Q, Rh), m2(1, 2.0 / 3, 3, 1)) < 1e-14);
}

TEST_CASE("sylvester: overlapping spectra are rejected") {
  try {
    solve_sylvester<double>(eye<double>(2), eye<double>(2), eye<double>(2));
    FAIL("expected SpectraOverlap");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SpectraOverlap);
  }
}

TEST_CASE("sylvester: residual bound on random separated instances") {
  std::mt19937 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 4;
    const Md P = random_matrix(rng, n), Q = random_matrix(rng, n), Rh = random_matrix(rng, n);
    if (spectral_gap<double>(P, Q) < 0.5) continue;
    const Md X = solve_sylvester<double>(P, Q, Rh);
    const double res = max_abs<double>(Md(X * P - Q * X - Rh));
    const double bound = 1e-10 * (P.norm() + Q.norm()) * X.norm() + 1e-12 * Rh.norm();
    CHECK(res <= bound);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("matrix_power examples") {
  CHECK(diff(matrix_power<double>(m2(0.5, 0, 0, -0.5), Cd(4)), m2(2, 0, 0, 0.5)) < 1e-14);
  const Md N = m2(0, 1, 0, 0);
  CHECK(diff(matrix_power<double>(N, Cd(std::exp(1.0))), m2(1, 1, 0, 1)) < 1e-14);
  CHECK(diff(matrix_power<double>(m2(1, 1, 0, 1), Cd(2)), m2(2, 2 * std::log(2.0), 0, 2)) < 1e-13);
  try {
    matrix_power<double>(N, Cd(0));
    FAIL("expected ZeroArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroArgument);
  }
}

TEST_CASE("log on the cut: positive reals real, arg in [0, 2pi)") {
  CHECK(std::abs(log_on_cut<double>(Cd(3)) - Cd(std::log(3.0))) < 1e-15);
  CHECK(std::abs(log_on_cut<double>(Cd(-1)).imag() - M_PI) < 1e-15);
  CHECK(log_on_cut<double>(Cd(1, -1e-9)).imag() > 6.28);
}

TEST_CASE("matrix_power inverse property") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> r(0.1, 10), th(0.1, 6.2);
  for (int t = 0; t < 50; ++t) {
    Md A = random_matrix(rng, 3);
    A *= 2.0 / std::max(1.0, A.norm());
    const Cd z = std::polar(r(rng), th(rng));
    CHECK(diff(Md(matrix_power<double>(A, z) * matrix_power<double>(Md(-A), z)), eye<double>(3)) < 1e-10);
  }
}

TEST_CASE("matrix_exp examples and commuting sums") {
  CHECK(diff(matrix_exp<double>(zeros<double>(2)), eye<double>(2)) == 0);
  CHECK(diff(matrix_exp<double>(m2(1, 0, 0, 2)), m2(std::exp(1.0), 0, 0, std::exp(2.0))) < 1e-13);
  CHECK(diff(matrix_exp<double>(m2(0, 1, 0, 0)), m2(1, 1, 0, 1)) < 1e-15);

  std::mt19937 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Md A = random_matrix(rng, 3);
    const Md B = Md(0.7 * A + 0.3 * A * A);  // commutes with A
    const Md lhs = matrix_exp<double>(Md(A + B));
    const Md rhs = matrix_exp<double>(A) * matrix_exp<double>(B);
    CHECK(diff(lhs, rhs) <= 1e-10 * std::max(1.0, max_abs<double>(lhs)));
  }

  ExpFlags f;
  Md big = m1(1e5);
  matrix_exp<double>(big, &f);
  CHECK(f.blow_up);
}

TEST_CASE("matrix polynomial arithmetic") {
  using P = MatrixPolynomial<double>;
  const P a({m2(1, 0, 0, 1), m2(0, 1, 0, 0)});  // I + Nz
  const P b({m2(1, 0, 0, 1), m2(0, -1, 0, 0)});
  const P prod = a * b;  // I − N²z² = I
  CHECK(prod.trimmed(1e-15).degree() == 0);
  CHECK(diff(prod(Cd(2.5)), eye<double>(2)) < 1e-15);
  CHECK(a.is_monic(0) == false);
  CHECK(P::monomial(eye<double>(2), 3).is_monic(0));
  CHECK(diff(a.derivative()(Cd(7)), m2(0, 1, 0, 0)) == 0);
  CHECK(diff(a.shifted(2)(Cd(2)), Md(4.0 * a(Cd(2)))) < 1e-15);
}

TEST_CASE("block matrices: swap matrix and determinants") {
  const auto J = swap_matrix<double>(2);
  CHECK(std::abs(J.determinant() - Cd(1)) < 1e-15);
  const auto D = block_diag<double>(m2(2, 0, 0, 1), m2(0.5, 0, 0, 1));
  CHECK(std::abs(D.determinant() - Cd(1)) < 1e-15);
  CHECK(diff(D.inverse().dense(), block_diag<double>(m2(0.5, 0, 0, 1), m2(2, 0, 0, 1)).dense()) < 1e-15);
}
