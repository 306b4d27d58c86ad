#include "matbiorth/moments.hpp"

#include <Eigen/SVD>

namespace matbiorth {

template <class R>
MomentTable<R> MomentTable<R>::prefix(int count) const {
  MomentTable t;
  t.moments.assign(moments.begin(), moments.begin() + count);
  t.source.assign(source.begin(), source.begin() + count);
  t.err_est.assign(err_est.begin(), err_est.begin() + count);
  return t;
}

template <class R>
MomentTable<R> MomentTable<R>::scaled(R c) const {
  MomentTable t = *this;
  for (auto& m : t.moments) m *= c;
  for (auto& e : t.err_est) e *= std::abs(c);
  return t;
}

template <class R>
MomentTable<R> moments_by_quadrature(const WeightModel<R>& model, int M, R rel_tol,
                                     bool parallel) {
  const int n = model.dim();
  RayIntegrand<R> f = [&model, M](R x, std::vector<Mat<R>>& out) {
    Mat<R> w = model.eval(x);
    for (int k = 0; k <= M; ++k) {
      out[k] = w;
      w *= x;
    }
  };
  QuadConfig<R> cfg;
  cfg.rel_tol = rel_tol;
  cfg.origin_exponent = model.origin_exponent();
  cfg.parallel = parallel;
  const QuadResult<R> q = integrate_ray<R>(f, M + 1, n, cfg);
  MomentTable<R> t;
  t.moments = q.value;
  t.err_est = q.err_est;
  t.source.assign(M + 1, MomentSource::Quadrature);
  return t;
}

template <class R>
MomentTable<R> moments_by_recurrence(const WeightModel<R>& model, const MomentTable<R>& seed,
                                     int M) {
  const auto& p = model.pearson();
  const int d = p.degree();
  if (seed.size() < d) throw Error(ErrorKind::Shape, "seed shorter than the Pearson degree");
  MomentTable<R> t = seed.prefix(std::min(seed.size(), M + 1));
  const Mat<R> P = p.hR.coeff(d);
  const Mat<R> Q = -p.hL.coeff(d);
  const R kappa = sylvester_inverse_norm<R>(P, Q);
  const R eps = std::numeric_limits<R>::epsilon();
  std::vector<R> hnorm(d + 1);
  for (int j = 0; j <= d; ++j)
    hnorm[j] = p.hL.coeff(j).cwiseAbs().rowwise().sum().maxCoeff() +
               p.hR.coeff(j).cwiseAbs().colwise().sum().maxCoeff();
  for (int top = t.size(); top <= M; ++top) {
    const int n = top - d;
    Mat<R> rhs = -R(n + 1) * t.moments[n];
    R err = R(n + 1) * t.err_est[n];
    for (int j = 0; j < d; ++j) {
      rhs -= p.hL.coeff(j) * t.moments[n + j] + t.moments[n + j] * p.hR.coeff(j);
      err += hnorm[j] * t.err_est[n + j];
    }
    Mat<R> X = solve_sylvester<R>(P, Q, rhs);
    t.moments.push_back(X);
    t.source.push_back(MomentSource::Recurrence);
    t.err_est.push_back(kappa * err + 16 * eps * max_abs<R>(X));
  }
  return t;
}

template <class R>
R condition_budget() {
  return R(1e-3) / std::numeric_limits<R>::epsilon();
}

template <class R>
std::vector<R> equilibration(const Mat<R>& H) {
  std::vector<R> d(H.rows());
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    const R a = std::abs(H(i, i));
    d[i] = a > 0 ? R(1) / std::sqrt(a) : R(1);
  }
  return d;
}

template <class R>
BlockMoments<R> block_moment_matrix(const MomentTable<R>& table, int n) {
  const int N = table.dim();
  if (table.size() < 2 * n + 1) throw Error(ErrorKind::Shape, "moment table too short");
  Mat<R> H(N * (n + 1), N * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int k = 0; k <= n; ++k) H.block(j * N, k * N, N, N) = table[j + k];
  const std::vector<R> d = equilibration<R>(H);
  Mat<R> S = H;
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) *= d[i] * d[j];
  Eigen::JacobiSVD<Mat<R>> svd(S);
  const auto& sv = svd.singularValues();
  const R smin = sv(sv.size() - 1);
  const R cond = smin > 0 ? sv(0) / smin : std::numeric_limits<R>::infinity();
  if (!(cond <= condition_budget<R>()))
    throw Error(ErrorKind::RegularityFailure,
                "block moment matrix numerically singular at n = " + std::to_string(n));
  return {H, cond};
}

#define MATBIORTH_INSTANTIATE(R)                                                              \
  template struct MomentTable<R>;                                                            \
  template MomentTable<R> moments_by_quadrature<R>(const WeightModel<R>&, int, R, bool);     \
  template MomentTable<R> moments_by_recurrence<R>(const WeightModel<R>&,                    \
                                                   const MomentTable<R>&, int);              \
  template R condition_budget<R>();                                                          \
  template std::vector<R> equilibration<R>(const Mat<R>&);                                   \
  template BlockMoments<R> block_moment_matrix<R>(const MomentTable<R>&, int);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
