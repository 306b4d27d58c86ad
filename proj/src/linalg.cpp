#include "matbiorth/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <numbers>

namespace matbiorth {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SpectraOverlap: return "SpectraOverlap";
    case ErrorKind::ZeroArgument: return "ZeroArgument";
    case ErrorKind::UnsupportedEvaluator: return "UnsupportedEvaluator";
    case ErrorKind::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorKind::RegularityFailure: return "RegularityFailure";
    case ErrorKind::TooCloseToSupport: return "TooCloseToSupport";
    case ErrorKind::PoleAtZero: return "PoleAtZero";
    case ErrorKind::NotEigenfunction: return "NotEigenfunction";
    case ErrorKind::CommutativityViolation: return "CommutativityViolation";
    case ErrorKind::SingularFactor: return "SingularFactor";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::Shape: return "Shape";
  }
  return "Unknown";
}

template <class R>
std::vector<Cx<R>> eigenvalues(const Mat<R>& a) {
  Eigen::ComplexEigenSolver<Mat<R>> es(a, false);
  std::vector<Cx<R>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

template <class R>
R spectral_gap(const Mat<R>& P, const Mat<R>& Q) {
  R gap = std::numeric_limits<R>::infinity();
  for (const auto& p : eigenvalues<R>(P))
    for (const auto& q : eigenvalues<R>(Q)) gap = std::min(gap, std::abs(p - q));
  return gap;
}

namespace {

// Column-major vec: vec(X·P) = (Pᵀ ⊗ I)·vec X, vec(Q·X) = (I ⊗ Q)·vec X.
template <class R>
Mat<R> sylvester_operator(const Mat<R>& P, const Mat<R>& Q) {
  const Eigen::Index n = P.rows();
  Mat<R> K = Mat<R>::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < n; ++i) K(j * n + i, k * n + i) += P(k, j);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) K(j * n + i, j * n + k) -= Q(i, k);
  return K;
}

}  // namespace

template <class R>
R sylvester_inverse_norm(const Mat<R>& P, const Mat<R>& Q) {
  const Mat<R> Kinv = sylvester_operator<R>(P, Q).inverse();
  return Kinv.cwiseAbs().rowwise().sum().maxCoeff();
}

template <class R>
Mat<R> solve_sylvester(const Mat<R>& P, const Mat<R>& Q, const Mat<R>& Rhs, R gap_tol) {
  const Eigen::Index n = P.rows();
  if (spectral_gap<R>(P, Q) < gap_tol)
    throw Error(ErrorKind::SpectraOverlap, "spectra of P and Q are not separated");
  const Mat<R> K = sylvester_operator<R>(P, Q);
  Eigen::Matrix<Cx<R>, Eigen::Dynamic, 1> rhs =
      Eigen::Map<const Eigen::Matrix<Cx<R>, Eigen::Dynamic, 1>>(Rhs.data(), n * n);
  Eigen::Matrix<Cx<R>, Eigen::Dynamic, 1> x = K.fullPivLu().solve(rhs);
  return Eigen::Map<Mat<R>>(x.data(), n, n);
}

template <class R>
Mat<R> matrix_exp(const Mat<R>& a, ExpFlags* flags) {
  const int n = static_cast<int>(a.rows());
  const R norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > R(0.5)) s = static_cast<int>(std::ceil(std::log2(norm / R(0.5))));
  const Mat<R> b = a / std::ldexp(R(1), s);
  Mat<R> sum = eye<R>(n);
  Mat<R> term = eye<R>(n);
  const R eps = std::numeric_limits<R>::epsilon();
  for (int k = 1; k < 60; ++k) {
    term = (term * b / R(k)).eval();
    sum += term;
    if (max_abs<R>(term) <= eps * R(0.01) * max_abs<R>(sum)) break;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  if (flags) flags->blow_up = !all_finite<R>(sum);
  return sum;
}

template <class R>
Cx<R> log_on_cut(Cx<R> z) {
  if (z == Cx<R>(0)) throw Error(ErrorKind::ZeroArgument, "logarithm of zero");
  R arg = std::atan2(z.imag(), z.real());
  if (arg < 0) arg += 2 * std::numbers::pi_v<R>;
  return {std::log(std::abs(z)), arg};
}

template <class R>
Mat<R> matrix_power(const Mat<R>& a, Cx<R> z) {
  return matrix_exp<R>(Mat<R>(a * log_on_cut<R>(z)));
}

#define MATBIORTH_INSTANTIATE(R)                                                        \
  template std::vector<Cx<R>> eigenvalues<R>(const Mat<R>&);                           \
  template R spectral_gap<R>(const Mat<R>&, const Mat<R>&);                            \
  template R sylvester_inverse_norm<R>(const Mat<R>&, const Mat<R>&);                  \
  template Mat<R> solve_sylvester<R>(const Mat<R>&, const Mat<R>&, const Mat<R>&, R); \
  template Mat<R> matrix_exp<R>(const Mat<R>&, ExpFlags*);                             \
  template Cx<R> log_on_cut<R>(Cx<R>);                                                 \
  template Mat<R> matrix_power<R>(const Mat<R>&, Cx<R>);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
