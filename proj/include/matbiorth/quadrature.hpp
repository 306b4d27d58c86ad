#pragma once

#include <functional>
#include <vector>

#include "matbiorth/linalg.hpp"

namespace matbiorth {

template <class R>
struct GaussRule {
  std::vector<R> x;  // nodes on [−1, 1]
  std::vector<R> w;
};

// Gauss–Legendre nodes by Newton iteration on P_n; cached per (R, order).
template <class R>
const GaussRule<R>& gauss_legendre(int order);

// Fills out[k], k < components, with the integrand components at x > 0.
template <class R>
using RayIntegrand = std::function<void(R x, std::vector<Mat<R>>& out)>;

template <class R>
struct QuadConfig {
  R rel_tol = R(1e-13);
  // Lower bound on the power behaviour x^e of the integrand at 0 (e > −1); drives the grading depth.
  R origin_exponent = R(0);
  // Panel boundary between the geometric refinement towards 0 and the outward panels.
  R scale = R(1);
  int order = 40;
  int max_depth = 40;
  R max_x = R(1e5);
  bool parallel = true;
};

template <class R>
struct QuadResult {
  std::vector<Mat<R>> value;
  std::vector<R> err_est;   // per component, max over entries
  std::vector<R> abs_mass;  // per component, ∫ max-entry |f|
  int panels = 0;
  R x_max = 0;
};

// ∫₀^∞ f(x) dx for a vector of matrix-valued components. Panels are independent and may run
// on several threads; partial sums are combined serially in panel order so the result does
// not depend on the thread count.
template <class R>
QuadResult<R> integrate_ray(const RayIntegrand<R>& f, int components, int dim,
                            const QuadConfig<R>& cfg);

// Threads used by parallel kernels: MATBIORTH_THREADS if set, else the OpenMP default.
int worker_threads();

}  // namespace matbiorth
