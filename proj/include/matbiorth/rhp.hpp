#pragma once

#include <array>
#include <functional>
#include <vector>

#include "matbiorth/biorth.hpp"

namespace matbiorth {

enum class Side { Left, Right };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

// Raw residual norm plus the largest magnitude among the terms that produced it.
template <class R>
struct Residual {
  R raw = 0;
  R scale = 0;
  R relative() const { return raw / std::max(R(1), scale); }
};

// Polynomial identity residual with the largest coefficient among its terms.
template <class R>
struct PolynomialResidual {
  MatrixPolynomial<R> poly;
  R scale = 0;
  Residual<R> residual() const { return {poly.max_coeff(), scale}; }
};

// Off-ray sample ring: r ∈ {0.5, 2, 8}, θ = kπ/4 for k = 1..7.
template <class R>
std::vector<Cx<R>> z_ring();

// Left:  [Pₙ, Qₙ; −C_{n−1}P_{n−1}, −C_{n−1}Q_{n−1}]
// Right: [Pₙ, −P_{n−1}C_{n−1}; Qₙ, −Q_{n−1}C_{n−1}]
// d-th derivative in z (d ≤ 2); q must cover degrees n−1, n with ≥ d derivatives.
template <class R>
BlockMatrix2x2<R> assemble_Y(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                             Side side, Cx<R> z, int d = 0);

template <class R>
BlockMatrix2x2<R> assemble_Y(const BiorthSystem<R>& sys, const SecondKindEvaluator<R>& ev, int n,
                             Side side, Cx<R> z);

template <class R>
struct FundamentalFrame {
  int n = 0;
  Side side = Side::Left;
  Cx<R> z;
  BlockMatrix2x2<R> Y, dY, d2Y;
};

template <class R>
FundamentalFrame<R> make_frame(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                               Side side, Cx<R> z);

template <class R>
R det_residual(const FundamentalFrame<R>& f);

// Y·diag(z^{−n}, zⁿ) − I (left), diag(z^{−n}, zⁿ)·Y − I (right).
template <class R>
R normalization_residual(const FundamentalFrame<R>& f);

// QₙᴸP_{n−1}ᴿ − PₙᴸQ_{n−1}ᴿ − C_{n−1}⁻¹, P_{n−1}ᴸQₙᴿ − Q_{n−1}ᴸPₙᴿ − C_{n−1}⁻¹, QₙᴸPₙᴿ − PₙᴸQₙᴿ.
// cinv_override replaces C_{n−1}⁻¹ on the right-hand sides (perturbation controls).
template <class R>
std::array<Residual<R>, 3> corollary_identities(const BiorthSystem<R>& sys,
                                                const SecondKindValues<R>& q, int n, Cx<R> z,
                                                const Mat<R>* cinv_override = nullptr);

// Yᴸ·(J·Yᴿ·J⁻¹) − I with J the swap matrix.
template <class R>
Residual<R> inverse_consistency(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                                Cx<R> z);

// Left: [zI − βₙᴸ, Cₙ⁻¹; −Cₙ, 0]; right: [zI − βₙᴿ, −Cₙ; Cₙ⁻¹, 0].
template <class R>
MatrixPolynomial<R> transfer_polynomial(const BiorthSystem<R>& sys, int n, Side side);

template <class R>
BlockMatrix2x2<R> transfer_matrix(const BiorthSystem<R>& sys, int n, Side side, Cx<R> z);

// Y_{n+1} − TₙYₙ (left) or Y_{n+1} − YₙTₙ (right); q covers n−1..n+1.
template <class R>
Residual<R> transfer_residual(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                              Side side, Cx<R> z);

// M̃ₙ = z·Mₙ as a 2N×2N matrix polynomial.
template <class R>
struct StructureMatrix {
  int n = 0;
  Side side = Side::Left;
  MatrixPolynomial<R> Mtilde;
  BlockMatrix2x2<R> pole_residue;  // M̃ₙ(0)
  BlockMatrix2x2<R> at(Cx<R> z) const { return BlockMatrix2x2<R>::from_dense(Mtilde(z)); }
};

enum class StructureForm {
  Entries,    // blockwise closed formulas for quadratic h
  Expansion,  // M̃ from the large-z expansion of Yₙ
};

// Right side via M̃ᴿ = −S·M̃ᴸ·S⁻¹, S = [0 −I; I 0].
template <class R>
StructureMatrix<R> structure_matrix_explicit(const BiorthSystem<R>& sys,
                                             const PearsonData<R>& pearson, int n,
                                             Side side = Side::Left,
                                             StructureForm form = StructureForm::Entries);

// z·Z′Z⁻¹ (left) or z·Z⁻¹Z′ (right) with Zᴸ = Yᴸ·diag(Wᴸ, (Wᴿ)⁻¹), Zᴿ = diag(Wᴿ, (Wᴸ)⁻¹)·Yᴿ;
// Z′ by Richardson-extrapolated central differences of step h and h/2.
template <class R>
BlockMatrix2x2<R> structure_matrix_numeric(const SecondKindEvaluator<R>& ev, int n, Side side,
                                           Cx<R> z, R step = R(1e-4));

template <class R>
BlockMatrix2x2<R> constant_jump_matrix(const SecondKindEvaluator<R>& ev, int n, Side side,
                                       Cx<R> z);

// 1/z coefficient of Mₙ by the trapezoidal rule on |z| = r at θ = 2π(k + ½)/points.
template <class R>
BlockMatrix2x2<R> laurent_residue(const SecondKindEvaluator<R>& ev, int n, Side side, R r,
                                  int points = 12, R step = R(1e-4));

// M̃_{n+1}Tₙ − TₙM̃ₙ − z·diag(I, 0) (left) or TₙM̃_{n+1} − M̃ₙTₙ − z·diag(I, 0) (right).
template <class R>
PolynomialResidual<R> zero_curvature_residual(const BiorthSystem<R>& sys,
                                            const PearsonData<R>& pearson, int n,
                                            Side side = Side::Left);

// N(F) = F′ + F²/z split as regular polynomial + residue/z.
template <class R>
struct NTransform {
  MatrixPolynomial<R> regular;
  Mat<R> residue;
  bool has_pole() const { return max_abs<R>(residue) > R(0); }
  Mat<R> operator()(Cx<R> z) const;
};

template <class R>
NTransform<R> n_transform(const MatrixPolynomial<R>& F);

// Pointwise N(F)(z) with F′ by Richardson central differences.
template <class R>
Mat<R> n_transform(const std::function<Mat<R>(Cx<R>)>& F, Cx<R> z, R step = R(1e-3));

// Left:  zY′ + Y·diag(hᴸ, −hᴿ) − M̃ᴸY
// Right: zY′ + diag(hᴿ, −hᴸ)·Y − YM̃ᴿ
template <class R>
Residual<R> first_order_ode_residual(const FundamentalFrame<R>& f, const PearsonData<R>& pearson,
                                     const StructureMatrix<R>& m);

// Left:  zY″ + Y′·diag(2hᴸ+I, −2hᴿ+I) + Y·diag(N(hᴸ), N(−hᴿ)) − N(M̃ᴸ)Y
// Right: zY″ + diag(2hᴿ+I, −2hᴸ+I)·Y′ + diag(N(hᴿ), N(−hᴸ))·Y − Y·N(M̃ᴿ)
template <class R>
Residual<R> second_order_ode_residual(const FundamentalFrame<R>& f,
                                      const PearsonData<R>& pearson,
                                      const StructureMatrix<R>& m);

// First block row of the ODEs restricted to Pₙᴸ, multiplied by z so that both are polynomial:
//   zP′ + P·hᴸ − M̃₁₁P + M̃₁₂C_{n−1}P_{n−1}
//   z²P″ + zP′aᴸ + P·zN(hᴸ) − (zN(M̃))₁₁P + (zN(M̃))₁₂C_{n−1}P_{n−1}
template <class R>
PolynomialResidual<R> first_order_polynomial_residual(const BiorthSystem<R>& sys,
                                                    const PearsonData<R>& pearson, int n);
template <class R>
PolynomialResidual<R> second_order_polynomial_residual(const BiorthSystem<R>& sys,
                                                     const PearsonData<R>& pearson, int n);

template <class R>
struct EigenReport {
  Mat<R> lambdaL, lambdaR;
  Residual<R> left, right;   // ℒᴸ(Pₙᴸ) − λᴸPₙᴸ and ℒᴿ(Pₙᴿ) − Pₙᴿλᴿ, coefficientwise
  Residual<R> intertwining;  // λᴸCₙ⁻¹ − Cₙ⁻¹λᴿ
};

// ℒᴸ(P) = zP″ + P′aᴸ + Pαᴸ, ℒᴿ(P) = zP″ + aᴿP′ + αᴿP, a = 2h + I, h of degree 1.
// λ comes from the zⁿ coefficient. Throws NotEigenfunction above tol.
template <class R>
EigenReport<R> eigenvalue_check(const BiorthSystem<R>& sys, const PearsonData<R>& pearson, int n,
                                const Mat<R>& alphaL, const Mat<R>& alphaR, R tol = R(1e-8));

// (αᴸ − N(hᴸ))W − W(αᴿ − N(hᴿ)) at x.
template <class R>
Mat<R> hidden_constraint_residual(const WeightModel<R>& model, const Mat<R>& alphaL,
                                  const Mat<R>& alphaR, R x);

// ℓᴸ(P) = zP″ + P′aᴸ + P·N(hᴸ), ℓᴿ(P) = zP″ + aᴿP′ + N(hᴿ)·P.
// max over matrix-unit monomials P = E·z^i, Q = E′·z^j (i ≤ d1, j ≤ d2) of
// |⟨ℓᴸP, Q⟩ − ⟨P, ℓᴿQ⟩|. The 1/z parts use W_{k−1}; the z⁰·z⁰ part integrates
// (h(0)ᴸ²W − Wh(0)ᴿ²)/x by quadrature when that integrand is not identically zero.
template <class R>
Residual<R> adjointness_check(const WeightModel<R>& model, const MomentTable<R>& table, int d1,
                              int d2);

// S·(Zᴸ)⁻¹·S⁻¹ − Zᴿ
template <class R>
Residual<R> zlr_residual(const SecondKindEvaluator<R>& ev, int n, Cx<R> z);

// Mᴿ + S·Mᴸ·S⁻¹ from numeric logarithmic derivatives.
template <class R>
Residual<R> right_structure_relation(const SecondKindEvaluator<R>& ev, int n, Cx<R> z,
                                     R step = R(1e-4));

// Scalar Laguerre: zP″ − (z − α − 1)P′ + nP (polynomial) and zQ″ + (z − α + 1)Q′ + (n+1)Q.
template <class R>
PolynomialResidual<R> laguerre_p_residual(const BiorthSystem<R>& sys, int n, R alpha);
template <class R>
Residual<R> laguerre_q_residual(const SecondKindValues<R>& q, int n, R alpha, Cx<R> z);

}  // namespace matbiorth
