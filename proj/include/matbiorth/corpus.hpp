#pragma once

#include <string>
#include <vector>

#include "matbiorth/weights.hpp"

// Reference weights used by the tests, the acceptance runner and the example configs.
namespace matbiorth::corpus {

template <class R>
Mat<R> mat(int n, std::initializer_list<Cx<R>> rowmajor) {
  Mat<R> m(n, n);
  auto it = rowmajor.begin();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = *it++;
  return m;
}

template <class R>
Mat<R> scalar(R v) {
  return Mat<R>::Constant(1, 1, Cx<R>(v));
}

// x^α e^{−x}
template <class R>
WeightModel<R> laguerre(R alpha) {
  return WeightModel<R>::duran_grunbaum(scalar<R>(R(-0.5)), scalar<R>(R(-0.5)), scalar<R>(alpha));
}

// e^{A₁x} x^α e^{A₂x} with α = [[1/2, 1/5], [1/5, 1/2]], A₁ = A₂ = [[−3/5, 1/10], [1/10, −3/5]]
template <class R>
WeightModel<R> dg_commuting() {
  const Mat<R> a = mat<R>(2, {R(0.5), R(0.2), R(0.2), R(0.5)});
  const Mat<R> A = mat<R>(2, {R(-0.6), R(0.1), R(0.1), R(-0.6)});
  return WeightModel<R>::duran_grunbaum(A, A, a);
}

// Hermitian variant: the off-diagonal couplings are imaginary.
template <class R>
WeightModel<R> dg_hermitian() {
  const Cx<R> i(0, 1);
  const Mat<R> a = mat<R>(2, {R(0.5), R(0.2) * i, R(-0.2) * i, R(0.5)});
  const Mat<R> A = mat<R>(2, {R(-0.6), R(0.1) * i, R(-0.1) * i, R(-0.6)});
  return WeightModel<R>::duran_grunbaum(A, A, a);
}

// diag(e^{−x}, x^{1/2}e^{−x})
template <class R>
WeightModel<R> diag_laguerre() {
  const Mat<R> A = mat<R>(2, {R(-0.5), R(0), R(0), R(-0.5)});
  return WeightModel<R>::duran_grunbaum(A, A, mat<R>(2, {R(0), R(0), R(0), R(0.5)}));
}

// One-sided hᴸ = A + Bz + Cz² with A = [[1, 1], [0, 1/2]], C = −I − [[0, 1], [0, 0]]/2.
template <class R>
WeightModel<R> freud_noncommuting(bool with_B = false) {
  const Mat<R> A = mat<R>(2, {R(1), R(1), R(0), R(0.5)});
  const Mat<R> C = mat<R>(2, {R(-1), R(-0.5), R(0), R(-1)});
  const Mat<R> B = with_B ? mat<R>(2, {R(0.3), R(0), R(0.4), R(-0.2)}) : zeros<R>(2);
  return WeightModel<R>::freud_ray(A, B, C);
}

// x^A e^{Cx²/2}
template <class R>
WeightModel<R> scalar_freud(R A, R C) {
  return WeightModel<R>::freud_ray(scalar<R>(A), scalar<R>(R(0)), scalar<R>(C));
}

template <class R>
struct Entry {
  std::string name;
  WeightModel<R> model;
};

// The three families every cross-model criterion runs over.
template <class R>
std::vector<Entry<R>> standard() {
  return {{"laguerre_0.5", laguerre<R>(R(0.5))},
          {"dg_commuting", dg_commuting<R>()},
          {"freud_noncommuting", freud_noncommuting<R>()}};
}

}  // namespace matbiorth::corpus
