#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "matbiorth/linalg.hpp"

namespace matbiorth {

// z·(Wᴸ)′ = hᴸ·Wᴸ and z·(Wᴿ)′ = Wᴿ·hᴿ, W = Wᴸ·Wᴿ.
template <class R>
struct PearsonData {
  MatrixPolynomial<R> hL;
  MatrixPolynomial<R> hR;
  Mat<R> W0L;
  Mat<R> W0R;

  int dim() const { return hL.dim(); }
  int degree() const { return std::max(hL.trimmed().degree(), hR.trimmed().degree()); }
  Mat<R> AL() const { return hL.coeff(0); }
  Mat<R> AR() const { return hR.coeff(0); }
  bool one_sided() const { return hR.max_coeff() == R(0); }
};

// Coefficients H₁..H_K of Hᴸ(z) = I + Σ H_k z^k with Wᴸ = Hᴸ(z) z^{A} W₀, A = h(0).
template <class R>
std::vector<Mat<R>> frobenius_series(const MatrixPolynomial<R>& h, int K);

// Local solution of z·W′ = h(z)·W: Frobenius series in |z| ≤ radius, radial Taylor
// continuation beyond. The real-axis continuation is precomputed so evaluation is read-only.
template <class R>
class PearsonSolver {
 public:
  PearsonSolver(MatrixPolynomial<R> h, Mat<R> W0, R radius = R(0.5), R x_end = R(0));

  Mat<R> at_real(R x) const;
  // Off the ray: arg z ∈ (0, 2π), continued radially from the Frobenius disk.
  Mat<R> at_complex(Cx<R> z) const;
  // Frobenius partial sum with a fixed number of terms; for convergence studies.
  Mat<R> truncated(Cx<R> z, int K) const;
  R radius() const { return radius_; }
  int series_terms() const { return static_cast<int>(H_.size()); }

 private:
  struct Anchor {
    R c;
    R step;
    std::vector<Mat<R>> taylor;
  };
  Mat<R> series(Cx<R> z, int K) const;
  std::vector<Mat<R>> taylor_at(Cx<R> c, const Mat<R>& V0, Cx<R> u, bool* converged) const;
  static Mat<R> horner(const std::vector<Mat<R>>& v, Cx<R> u);

  MatrixPolynomial<R> h_;
  Mat<R> W0_;
  Mat<R> A_;
  R radius_;
  std::vector<Mat<R>> H_;  // H_0 = I, ...
  std::vector<Anchor> anchors_;
  R x_end_ = 0;
};

enum class EvaluatorKind { DuranGrunbaum, FreudRay, FrobeniusSeries };

template <class R>
class WeightModel {
 public:
  // e^{A₁z} z^α e^{A₂z} with [α, A₁] = [α, A₂] = 0; split hᴸ = α/2 + A₁z, hᴿ = α/2 + A₂z.
  static WeightModel duran_grunbaum(const Mat<R>& A1, const Mat<R>& A2, const Mat<R>& alpha);
  // One-sided Wᴸ with hᴸ = A + Bz + Cz², hᴿ = 0, Wᴿ = I.
  static WeightModel freud_ray(const Mat<R>& A, const Mat<R>& B, const Mat<R>& C,
                               std::optional<Mat<R>> W0 = std::nullopt);
  // Pearson data only; evaluated by the Frobenius series, continued numerically if allowed.
  static WeightModel frobenius(const PearsonData<R>& p, bool allow_continuation = true);

  // Same evaluator, different Pearson data; skips consistency validation (negative controls).
  WeightModel with_pearson(const PearsonData<R>& p) const;
  // c·W, applied to the left factor.
  WeightModel scaled(R c) const;

  const PearsonData<R>& pearson() const { return pearson_; }
  EvaluatorKind kind() const { return kind_; }
  std::string kind_name() const;
  int dim() const { return pearson_.dim(); }
  // Lower bound of the power behaviour of W at 0.
  R origin_exponent() const { return origin_exponent_; }
  bool commuting_closed_form() const { return closed_form_; }

  Mat<R> WL(Cx<R> z) const;
  Mat<R> WR(Cx<R> z) const;
  // W on the positive axis, real logarithm.
  Mat<R> eval(R x) const;
  // Pearson-implied W′(x) = (hᴸW + Whᴿ)/x.
  Mat<R> eval_derivative(R x) const;

  const Mat<R>& A1() const { return p1_; }
  const Mat<R>& A2() const { return p2_; }
  const Mat<R>& alpha() const { return p3_; }

 private:
  WeightModel() = default;
  void validate() const;
  void finalize();

  PearsonData<R> pearson_;
  EvaluatorKind kind_ = EvaluatorKind::FrobeniusSeries;
  Mat<R> p1_, p2_, p3_;  // (A₁, A₂, α) or (A, B, C)
  Mat<R> scale_;
  bool closed_form_ = false;
  bool allow_continuation_ = true;
  R origin_exponent_ = 0;
  std::shared_ptr<const PearsonSolver<R>> left_;
  std::shared_ptr<const PearsonSolver<R>> right_t_;  // solver for (Wᴿ)ᵀ
};

template <class R>
struct BoundaryCondition {
  std::string name;
  R near_zero_limit;
  R near_infinity_limit;
  R sup_norm;
  bool pass;
};

template <class R>
struct BoundaryReport {
  std::vector<BoundaryCondition<R>> conditions;
  bool pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
};

template <class R>
BoundaryReport<R> check_boundary_conditions(const WeightModel<R>& model, R tol = R(1e-8));

// (zW)″ − (aᴸW)′ + bᴸW − Wbᴿ and (zW)″ − (Waᴿ)′ + bᴸW − Wbᴿ, with W differentiated by
// finite differences of the evaluator and a, b taken from the Pearson data.
template <class R>
std::pair<Mat<R>, Mat<R>> weight_second_order_residual(const WeightModel<R>& model, R x,
                                                       R step = R(1e-3));

// Pearson-consistency residual z·W′ − hᴸW − Whᴿ at x (W′ by finite differences).
template <class R>
Mat<R> pearson_residual(const WeightModel<R>& model, R x, R step = R(1e-3));

}  // namespace matbiorth
