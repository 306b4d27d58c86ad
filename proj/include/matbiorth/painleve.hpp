#pragma once

#include <vector>

#include "matbiorth/biorth.hpp"
#include "matbiorth/rhp.hpp"

namespace matbiorth {

// One-sided quadratic Pearson data hᴸ = A + Bz + Cz² with left recursion coefficients.
template <class R>
class DPIVData {
 public:
  DPIVData(Mat<R> A, Mat<R> B, Mat<R> C, std::vector<Mat<R>> beta, std::vector<Mat<R>> gamma);

  const Mat<R>& A() const { return A_; }
  const Mat<R>& B() const { return B_; }
  const Mat<R>& C() const { return C_; }
  const std::vector<Mat<R>>& beta() const { return beta_; }
  const std::vector<Mat<R>>& gamma() const { return gamma_; }
  int dim() const { return static_cast<int>(A_.rows()); }

  // Σ_{k<n} β_k
  const Mat<R>& S(int n) const { return S_.at(n); }
  // Σ_{0≤j<i<n} βᵢβⱼ − Σ_{k<n} γ_k, the z^{n−2} coefficient of Pₙᴸ
  const Mat<R>& p2(int n) const { return p2_.at(n); }

  // Copy with γ_k replaced; partial sums rebuilt.
  DPIVData with_gamma(int k, const Mat<R>& g) const;

 private:
  Mat<R> A_, B_, C_;
  std::vector<Mat<R>> beta_, gamma_;
  std::vector<Mat<R>> S_, p2_;
};

// Requires one-sided Pearson data of degree 2; exit-code 5 class of failure otherwise.
template <class R>
DPIVData<R> make_dpiv_data(const BiorthSystem<R>& sys, const PearsonData<R>& pearson);

// (Sₙ, p²ₙ) by direct double sums.
template <class R>
std::pair<Mat<R>, Mat<R>> partial_sums_from_scratch(const DPIVData<R>& d, int n);

template <class R>
struct DPIVResidual {
  Mat<R> R1, R2;
  Mat<R> nonlocal1, nonlocal2;  // commutator right-hand sides
  Residual<R> r1, r2;
};

// With Sₙ = Σ_{k<n}βₖ:
//  (2n+1)I + A + C(γₙ₊₁+γₙ) + (Cβₙ+B)βₙ = [Sₙ,C]Sₙ₊₁ − [p²ₙ,C] + [Sₙ,B]
//  βₙ − γₙ(C(βₙ+βₙ₋₁)+B) + (C(βₙ+βₙ₊₁)+B)γₙ₊₁ = −γₙ[Sₙ₋₁,C] + [Sₙ,C]γₙ₊₁
// Needs β through n+1 and γ through n+1; n ≥ 1.
template <class R>
DPIVResidual<R> dpiv_residuals(const DPIVData<R>& d, int n);

// Same system with B = 0; throws InvalidModel when B ≠ 0.
template <class R>
DPIVResidual<R> nonabelian_theorem_residuals(const DPIVData<R>& d, int n);

template <class R>
struct XiMu {
  Mat<R> xi, mu;      // ξₙ = A/2 + nI + Cγₙ, μₙ = Cβₙ + B
  Residual<R> sum;    // βₙμₙ + ξₙ + ξₙ₊₁
  Residual<R> dpiv;   // ξₙ₊₁² − ξ₀² − γₙ₊₁μₙμₙ₊₁
};

// Throws CommutativityViolation unless A, B, C, β_k, γ_k (k ≤ n+1) commute to 1e−10 relative.
template <class R>
XiMu<R> commutative_xi_mu(const DPIVData<R>& d, int n);

enum class GHRFactor {
  Corrected,  // (ξₙ₊₁ − A/2 − (n+1)I)⁻¹ = (Cγₙ₊₁)⁻¹
  Printed,    // (ξₙ₊₁ − A/2 − nI)⁻¹, kept to show that it does not hold
};

// (ξₙ + ξₙ₊₁)(ξₙ₊₁ + ξₙ₊₂) − (F⁻¹(ξₙ₊₁² − ξ₀²))²; B = 0 and commuting data required.
// Throws SingularFactor when F is numerically singular.
template <class R>
Residual<R> ghr_instance_residual(const DPIVData<R>& d, int n,
                                  GHRFactor factor = GHRFactor::Corrected);

}  // namespace matbiorth
