#pragma once

#include <vector>

#include "matbiorth/quadrature.hpp"
#include "matbiorth/weights.hpp"

namespace matbiorth {

enum class MomentSource { Quadrature, Recurrence };

// W_n = ∫₀^∞ xⁿ W(x) dx.
template <class R>
struct MomentTable {
  std::vector<Mat<R>> moments;
  std::vector<MomentSource> source;
  std::vector<R> err_est;

  int size() const { return static_cast<int>(moments.size()); }
  int dim() const { return moments.empty() ? 0 : static_cast<int>(moments[0].rows()); }
  const Mat<R>& operator[](int n) const { return moments[n]; }

  MomentTable prefix(int count) const;
  MomentTable scaled(R c) const;
};

template <class R>
MomentTable<R> moments_by_quadrature(const WeightModel<R>& model, int M, R rel_tol = R(1e-13),
                                     bool parallel = true);

// Extends seed (at least deg h entries) to W_0..W_M with
// −(n+1)Wₙ = Σ_j (hᴸ_j W_{n+j} + W_{n+j} hᴿ_j), solved for the top moment.
template <class R>
MomentTable<R> moments_by_recurrence(const WeightModel<R>& model, const MomentTable<R>& seed,
                                     int M);

template <class R>
struct BlockMoments {
  Mat<R> matrix;   // block (j, k) = W_{j+k}, j, k ≤ n
  R condition;     // 2-norm condition number after symmetric diagonal equilibration
};

// Largest equilibrated condition number accepted before RegularityFailure.
template <class R>
R condition_budget();

template <class R>
BlockMoments<R> block_moment_matrix(const MomentTable<R>& table, int n);

// Diagonal equilibration D with D·H·D having unit diagonal magnitudes.
template <class R>
std::vector<R> equilibration(const Mat<R>& H);

}  // namespace matbiorth
