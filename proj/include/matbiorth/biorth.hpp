#pragma once

#include <vector>

#include "matbiorth/moments.hpp"

namespace matbiorth {

template <class R>
struct BiorthSystem {
  int n_max = 0;
  int dim = 0;
  std::vector<MatrixPolynomial<R>> PL, PR;  // monic, degree n
  std::vector<Mat<R>> Cinv;                 // ⟨Pₙᴸ, zⁿ⟩
  std::vector<Mat<R>> Cinv_right;           // ⟨zⁿ, Pₙᴿ⟩, kept for the cross-check
  std::vector<Mat<R>> C;
  std::vector<Mat<R>> betaL, betaR;    // n < n_max
  std::vector<Mat<R>> gammaL, gammaR;  // n ≤ n_max, γ₀ = 0
  std::vector<Mat<R>> qL1, qL2, qR1, qR2;
  std::vector<R> hankel_condition;

  // z^{n−1} and z^{n−2} coefficients; zero when the degree is too small.
  Mat<R> p1L(int n) const { return n >= 1 ? PL[n].coeff(n - 1) : zeros<R>(dim); }
  Mat<R> p2L(int n) const { return n >= 2 ? PL[n].coeff(n - 2) : zeros<R>(dim); }
  Mat<R> p1R(int n) const { return n >= 1 ? PR[n].coeff(n - 1) : zeros<R>(dim); }
  Mat<R> p2R(int n) const { return n >= 2 ? PR[n].coeff(n - 2) : zeros<R>(dim); }
};

// Needs W₀..W_{2·n_max+2}.
template <class R>
BiorthSystem<R> build_biorth(const MomentTable<R>& table, int n_max);

template <class R>
struct RecursionCoefficients {
  std::vector<Mat<R>> betaL, gammaL, betaR, gammaR;
};

template <class R>
RecursionCoefficients<R> recursion_coefficients(const BiorthSystem<R>& sys);

template <class R>
struct SecondKindCoefficients {
  std::vector<Mat<R>> qL1, qL2, qR1, qR2;
};

template <class R>
SecondKindCoefficients<R> second_kind_coefficients(const BiorthSystem<R>& sys,
                                                   const MomentTable<R>& table);

// Σ Pᵢ W_{i+j} Q_j
template <class R>
Mat<R> sesquilinear(const MatrixPolynomial<R>& P, const MatrixPolynomial<R>& Q,
                    const MomentTable<R>& table);

// G[n][m] = ∫ Pₙᴸ(x)W(x)P_mᴿ(x) dx for n, m ≤ n_hi by quadrature of the polynomial values,
// independent of any moment table.
template <class R>
std::vector<std::vector<Mat<R>>> gram_by_quadrature(const WeightModel<R>& model,
                                                    const BiorthSystem<R>& sys, int n_hi,
                                                    R rel_tol = R(1e-13), bool parallel = true);

// z·Pₙ − P_{n+1} − βₙPₙ − γₙP_{n−1} (left) or the right-multiplied analogue, as a polynomial.
template <class R>
MatrixPolynomial<R> recurrence_residual(const BiorthSystem<R>& sys, int n, bool left);

// −Σ_{k=n}^{K} ⟨Pₙᴸ, x^k⟩ z^{−k−1}, K limited by the table.
template <class R>
Mat<R> second_kind_asymptotic(const BiorthSystem<R>& sys, const MomentTable<R>& table, int n,
                              Cx<R> z);

template <class R>
R distance_to_support(Cx<R> z);

template <class R>
struct SecondKindValues {
  int n_lo = 0;
  // [n − n_lo][d] = d-th derivative
  std::vector<std::vector<Mat<R>>> QL, QR;
  const Mat<R>& L(int n, int d = 0) const { return QL[n - n_lo][d]; }
  const Mat<R>& Rt(int n, int d = 0) const { return QR[n - n_lo][d]; }
};

// Qₙᴸ(z) = ∫ Pₙᴸ(x)W(x)/(x − z) dx, Qₙᴿ(z) = ∫ W(x)Pₙᴿ(x)/(x − z) dx; derivatives through
// the differentiated kernel.
template <class R>
class SecondKindEvaluator {
 public:
  SecondKindEvaluator(const WeightModel<R>& model, const BiorthSystem<R>& sys,
                      R rel_tol = R(1e-13), bool parallel = true)
      : model_(model), sys_(sys), rel_tol_(rel_tol), parallel_(parallel) {}

  SecondKindValues<R> evaluate(Cx<R> z, int n_lo, int n_hi, int derivatives) const;
  Mat<R> left(int n, Cx<R> z) const { return evaluate(z, n, n, 0).L(n); }
  Mat<R> right(int n, Cx<R> z) const { return evaluate(z, n, n, 0).Rt(n); }

  const WeightModel<R>& model() const { return model_; }
  const BiorthSystem<R>& system() const { return sys_; }

 private:
  const WeightModel<R>& model_;
  const BiorthSystem<R>& sys_;
  R rel_tol_;
  bool parallel_;
};

template <class R>
Mat<R> eval_second_kind(const SecondKindEvaluator<R>& ev, int n, Cx<R> z) {
  return ev.left(n, z);
}

}  // namespace matbiorth
