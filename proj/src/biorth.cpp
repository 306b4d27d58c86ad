#include "matbiorth/biorth.hpp"

namespace matbiorth {

namespace {

template <class R>
Mat<R> hankel(const MomentTable<R>& t, int n, int shift) {
  const int N = t.dim();
  Mat<R> H(N * n, N * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) H.block(j * N, k * N, N, N) = t[j + k + shift];
  return H;
}

// Monic left polynomial: a·H = −[W_n … W_{2n−1}], solved on the equilibrated Hankel matrix.
template <class R>
MatrixPolynomial<R> solve_left(const MomentTable<R>& t, int n) {
  const int N = t.dim();
  std::vector<Mat<R>> c(n + 1, zeros<R>(N));
  c[n] = eye<R>(N);
  if (n == 0) return MatrixPolynomial<R>(c);
  const Mat<R> H = hankel(t, n, 0);
  const std::vector<R> d = equilibration<R>(H);
  Mat<R> S = H;
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) *= d[i] * d[j];
  Mat<R> b(N, N * n);
  for (int m = 0; m < n; ++m) b.block(0, m * N, N, N) = -t[n + m];
  for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) *= d[j];
  // y·S = b·D  ⇔  Sᵀ·yᵀ = (b·D)ᵀ
  const Mat<R> yt = S.transpose().fullPivLu().solve(b.transpose());
  Mat<R> a = yt.transpose();
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) *= d[j];
  for (int k = 0; k < n; ++k) c[k] = a.block(0, k * N, N, N);
  return MatrixPolynomial<R>(c);
}

// Monic right polynomial: H·b = −[W_n; …; W_{2n−1}].
template <class R>
MatrixPolynomial<R> solve_right(const MomentTable<R>& t, int n) {
  const int N = t.dim();
  std::vector<Mat<R>> c(n + 1, zeros<R>(N));
  c[n] = eye<R>(N);
  if (n == 0) return MatrixPolynomial<R>(c);
  const Mat<R> H = hankel(t, n, 0);
  const std::vector<R> d = equilibration<R>(H);
  Mat<R> S = H;
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index j = 0; j < S.cols(); ++j) S(i, j) *= d[i] * d[j];
  Mat<R> rhs(N * n, N);
  for (int m = 0; m < n; ++m) rhs.block(m * N, 0, N, N) = -t[n + m];
  for (Eigen::Index i = 0; i < rhs.rows(); ++i) rhs.row(i) *= d[i];
  Mat<R> b = S.fullPivLu().solve(rhs);
  for (Eigen::Index i = 0; i < b.rows(); ++i) b.row(i) *= d[i];
  for (int k = 0; k < n; ++k) c[k] = b.block(k * N, 0, N, N);
  return MatrixPolynomial<R>(c);
}

// ⟨P, x^s⟩ = Σ Pᵢ W_{i+s}
template <class R>
Mat<R> left_moment(const MatrixPolynomial<R>& P, const MomentTable<R>& t, int s) {
  Mat<R> acc = zeros<R>(t.dim());
  for (int i = 0; i < P.size(); ++i) acc += P[i] * t[i + s];
  return acc;
}

// ⟨x^s, P⟩ = Σ W_{i+s} Pᵢ
template <class R>
Mat<R> right_moment(const MatrixPolynomial<R>& P, const MomentTable<R>& t, int s) {
  Mat<R> acc = zeros<R>(t.dim());
  for (int i = 0; i < P.size(); ++i) acc += t[i + s] * P[i];
  return acc;
}

}  // namespace

template <class R>
BiorthSystem<R> build_biorth(const MomentTable<R>& table, int n_max) {
  if (n_max < 0 || table.size() < 2 * n_max + 3)
    throw Error(ErrorKind::Shape, "moment table must reach index 2·n_max + 2");
  BiorthSystem<R> s;
  s.n_max = n_max;
  s.dim = table.dim();
  for (int n = 0; n <= n_max; ++n) {
    s.hankel_condition.push_back(block_moment_matrix<R>(table, n).condition);
    s.PL.push_back(solve_left<R>(table, n));
    s.PR.push_back(solve_right<R>(table, n));
    s.Cinv.push_back(left_moment<R>(s.PL[n], table, n));
    s.Cinv_right.push_back(right_moment<R>(s.PR[n], table, n));
    Eigen::FullPivLU<Mat<R>> lu(s.Cinv[n]);
    if (!lu.isInvertible())
      throw Error(ErrorKind::RegularityFailure, "Cₙ⁻¹ singular at n = " + std::to_string(n));
    s.C.push_back(lu.inverse());
  }
  const auto rc = recursion_coefficients<R>(s);
  s.betaL = rc.betaL;
  s.betaR = rc.betaR;
  s.gammaL = rc.gammaL;
  s.gammaR = rc.gammaR;
  const auto q = second_kind_coefficients<R>(s, table);
  s.qL1 = q.qL1;
  s.qL2 = q.qL2;
  s.qR1 = q.qR1;
  s.qR2 = q.qR2;
  return s;
}

template <class R>
RecursionCoefficients<R> recursion_coefficients(const BiorthSystem<R>& sys) {
  RecursionCoefficients<R> rc;
  for (int n = 0; n < sys.n_max; ++n) {
    rc.betaL.push_back(sys.p1L(n) - sys.p1L(n + 1));
    rc.betaR.push_back(sys.C[n] * rc.betaL.back() * sys.Cinv[n]);
  }
  for (int n = 0; n <= sys.n_max; ++n) {
    if (n == 0) {
      rc.gammaL.push_back(zeros<R>(sys.dim));
      rc.gammaR.push_back(zeros<R>(sys.dim));
    } else {
      rc.gammaL.push_back(sys.Cinv[n] * sys.C[n - 1]);
      rc.gammaR.push_back(sys.C[n - 1] * sys.Cinv[n]);
    }
  }
  return rc;
}

template <class R>
SecondKindCoefficients<R> second_kind_coefficients(const BiorthSystem<R>& sys,
                                                   const MomentTable<R>& table) {
  SecondKindCoefficients<R> q;
  for (int n = 0; n <= sys.n_max; ++n) {
    q.qL1.push_back(sys.C[n] * left_moment<R>(sys.PL[n], table, n + 1));
    q.qL2.push_back(sys.C[n] * left_moment<R>(sys.PL[n], table, n + 2));
    q.qR1.push_back(right_moment<R>(sys.PR[n], table, n + 1) * sys.C[n]);
    q.qR2.push_back(right_moment<R>(sys.PR[n], table, n + 2) * sys.C[n]);
  }
  return q;
}

template <class R>
Mat<R> sesquilinear(const MatrixPolynomial<R>& P, const MatrixPolynomial<R>& Q,
                    const MomentTable<R>& table) {
  if (P.size() + Q.size() - 1 > table.size())
    throw Error(ErrorKind::Shape, "moment table too short for the pairing");
  Mat<R> acc = zeros<R>(table.dim());
  for (int i = 0; i < P.size(); ++i)
    for (int j = 0; j < Q.size(); ++j) acc += P[i] * table[i + j] * Q[j];
  return acc;
}

template <class R>
std::vector<std::vector<Mat<R>>> gram_by_quadrature(const WeightModel<R>& model,
                                                    const BiorthSystem<R>& sys, int n_hi,
                                                    R rel_tol, bool parallel) {
  if (n_hi < 0 || n_hi > sys.n_max) throw Error(ErrorKind::Shape, "degree outside 0..n_max");
  const int K = n_hi + 1;
  RayIntegrand<R> f = [&](R x, std::vector<Mat<R>>& out) {
    const Mat<R> w = model.eval(x);
    std::vector<Mat<R>> pr(K);
    for (int m = 0; m < K; ++m) pr[m] = sys.PR[m](Cx<R>(x));
    for (int n = 0; n < K; ++n) {
      const Mat<R> pw = sys.PL[n](Cx<R>(x)) * w;
      for (int m = 0; m < K; ++m) out[n * K + m] = pw * pr[m];
    }
  };
  QuadConfig<R> cfg;
  cfg.rel_tol = rel_tol;
  cfg.origin_exponent = model.origin_exponent();
  cfg.parallel = parallel;
  const QuadResult<R> q = integrate_ray<R>(f, K * K, sys.dim, cfg);
  std::vector<std::vector<Mat<R>>> G(K);
  for (int n = 0; n < K; ++n)
    for (int m = 0; m < K; ++m) G[n].push_back(q.value[n * K + m]);
  return G;
}

template <class R>
MatrixPolynomial<R> recurrence_residual(const BiorthSystem<R>& sys, int n, bool left) {
  const int N = sys.dim;
  const MatrixPolynomial<R> prev =
      n >= 1 ? (left ? sys.PL[n - 1] : sys.PR[n - 1]) : MatrixPolynomial<R>::zero(N);
  if (left)
    return sys.PL[n].shifted(1) - sys.PL[n + 1] - sys.betaL[n] * sys.PL[n] -
           sys.gammaL[n] * prev;
  return sys.PR[n].shifted(1) - sys.PR[n + 1] - sys.PR[n] * sys.betaR[n] - prev * sys.gammaR[n];
}

template <class R>
Mat<R> second_kind_asymptotic(const BiorthSystem<R>& sys, const MomentTable<R>& table, int n,
                              Cx<R> z) {
  Mat<R> acc = zeros<R>(sys.dim);
  const int K = table.size() - 1 - n;
  Cx<R> zp = std::pow(z, -(n + 1));
  for (int k = n; k <= K; ++k) {
    acc -= left_moment<R>(sys.PL[n], table, k) * zp;
    zp /= z;
  }
  return acc;
}

template <class R>
R distance_to_support(Cx<R> z) {
  return z.real() >= 0 ? std::abs(z.imag()) : std::abs(z);
}

template <class R>
SecondKindValues<R> SecondKindEvaluator<R>::evaluate(Cx<R> z, int n_lo, int n_hi,
                                                     int derivatives) const {
  if (distance_to_support<R>(z) <= R(0.01))
    throw Error(ErrorKind::TooCloseToSupport, "z within 0.01 of the ray");
  if (n_lo < 0 || n_hi > sys_.n_max || n_lo > n_hi)
    throw Error(ErrorKind::Shape, "degree out of range");
  const int N = sys_.dim;
  const int count = n_hi - n_lo + 1;
  const int D = derivatives + 1;
  const int K = 2 * count * D;
  const auto& PL = sys_.PL;
  const auto& PR = sys_.PR;
  RayIntegrand<R> f = [&](R x, std::vector<Mat<R>>& out) {
    const Mat<R> w = model_.eval(x);
    const Cx<R> inv = R(1) / (Cx<R>(x, 0) - z);
    for (int i = 0; i < count; ++i) {
      const Cx<R> xc(x, 0);
      Mat<R> l = PL[n_lo + i](xc) * w * inv;
      Mat<R> r = w * PR[n_lo + i](xc) * inv;
      // d-th derivative of 1/(x − z) in z is d!/(x − z)^{d+1}
      for (int d = 0; d < D; ++d) {
        out[(i * D + d) * 2] = l;
        out[(i * D + d) * 2 + 1] = r;
        l *= inv * R(d + 1);
        r *= inv * R(d + 1);
      }
    }
  };
  QuadConfig<R> cfg;
  cfg.rel_tol = rel_tol_;
  cfg.origin_exponent = model_.origin_exponent();
  cfg.parallel = parallel_;
  const QuadResult<R> q = integrate_ray<R>(f, K, N, cfg);
  SecondKindValues<R> v;
  v.n_lo = n_lo;
  v.QL.resize(count);
  v.QR.resize(count);
  for (int i = 0; i < count; ++i)
    for (int d = 0; d < D; ++d) {
      v.QL[i].push_back(q.value[(i * D + d) * 2]);
      v.QR[i].push_back(q.value[(i * D + d) * 2 + 1]);
    }
  return v;
}

#define MATBIORTH_INSTANTIATE(R)                                                             \
  template BiorthSystem<R> build_biorth<R>(const MomentTable<R>&, int);                     \
  template RecursionCoefficients<R> recursion_coefficients<R>(const BiorthSystem<R>&);      \
  template SecondKindCoefficients<R> second_kind_coefficients<R>(const BiorthSystem<R>&,    \
                                                                 const MomentTable<R>&);    \
  template Mat<R> sesquilinear<R>(const MatrixPolynomial<R>&, const MatrixPolynomial<R>&,   \
                                  const MomentTable<R>&);                                   \
  template std::vector<std::vector<Mat<R>>> gram_by_quadrature<R>(                          \
      const WeightModel<R>&, const BiorthSystem<R>&, int, R, bool);                         \
  template MatrixPolynomial<R> recurrence_residual<R>(const BiorthSystem<R>&, int, bool);   \
  template Mat<R> second_kind_asymptotic<R>(const BiorthSystem<R>&, const MomentTable<R>&,  \
                                            int, Cx<R>);                                    \
  template R distance_to_support<R>(Cx<R>);                                                 \
  template class SecondKindEvaluator<R>;

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
