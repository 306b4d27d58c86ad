#include "matbiorth/painleve.hpp"

#include <Eigen/SVD>

namespace matbiorth {

namespace {

template <class R>
R norm_max(std::initializer_list<Mat<R>> ms) {
  R m = 0;
  for (const auto& a : ms) m = std::max(m, max_abs<R>(a));
  return m;
}

template <class R>
void require_commuting(const DPIVData<R>& d, int n) {
  std::vector<const Mat<R>*> xs = {&d.A(), &d.B(), &d.C()};
  for (int k = 0; k <= n + 1; ++k) {
    if (k < static_cast<int>(d.beta().size())) xs.push_back(&d.beta()[k]);
    if (k < static_cast<int>(d.gamma().size())) xs.push_back(&d.gamma()[k]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const R c = max_abs<R>(commutator<R>(*xs[i], *xs[j]));
      if (c > R(1e-10) * std::max(R(1), max_abs<R>(*xs[i]) * max_abs<R>(*xs[j])))
        throw Error(ErrorKind::CommutativityViolation, "recursion data do not commute");
    }
}

}  // namespace

template <class R>
DPIVData<R>::DPIVData(Mat<R> A, Mat<R> B, Mat<R> C, std::vector<Mat<R>> beta,
                      std::vector<Mat<R>> gamma)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), beta_(std::move(beta)),
      gamma_(std::move(gamma)) {
  const int N = dim();
  S_.push_back(zeros<R>(N));
  p2_.push_back(zeros<R>(N));
  const std::size_t m = std::min(beta_.size(), gamma_.size());
  for (std::size_t n = 0; n < m; ++n) {
    // from P_{n+1} = (z − βₙ)Pₙ − γₙP_{n−1}
    p2_.push_back(p2_[n] + beta_[n] * S_[n] - gamma_[n]);
    S_.push_back(S_[n] + beta_[n]);
  }
}

template <class R>
DPIVData<R> DPIVData<R>::with_gamma(int k, const Mat<R>& g) const {
  std::vector<Mat<R>> gamma = gamma_;
  gamma.at(k) = g;
  return DPIVData(A_, B_, C_, beta_, gamma);
}

template <class R>
DPIVData<R> make_dpiv_data(const BiorthSystem<R>& sys, const PearsonData<R>& pearson) {
  if (!pearson.one_sided() || pearson.hL.trimmed().degree() != 2)
    throw Error(ErrorKind::Shape, "needs one-sided Pearson data of degree 2");
  return DPIVData<R>(pearson.hL.coeff(0), pearson.hL.coeff(1), pearson.hL.coeff(2), sys.betaL,
                     sys.gammaL);
}

template <class R>
std::pair<Mat<R>, Mat<R>> partial_sums_from_scratch(const DPIVData<R>& d, int n) {
  const int N = d.dim();
  Mat<R> S = zeros<R>(N), p2 = zeros<R>(N);
  for (int k = 0; k < n; ++k) {
    S += d.beta()[k];
    p2 -= d.gamma()[k];
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) p2 += d.beta()[i] * d.beta()[j];
  return {S, p2};
}

template <class R>
DPIVResidual<R> dpiv_residuals(const DPIVData<R>& d, int n) {
  if (n < 1 || n + 1 >= static_cast<int>(d.beta().size()) ||
      n + 1 >= static_cast<int>(d.gamma().size()))
    throw Error(ErrorKind::Shape, "dPIV residual needs β, γ through n+1 and n ≥ 1");
  const int N = d.dim();
  const Mat<R> I = eye<R>(N);
  const Mat<R>&A = d.A(), &B = d.B(), &C = d.C();
  const auto& b = d.beta();
  const auto& g = d.gamma();
  const Mat<R>&S0 = d.S(n - 1), &S1 = d.S(n), &S2 = d.S(n + 1);

  DPIVResidual<R> r;
  const Mat<R> l1a = R(2 * n + 1) * I + A, l1b = C * (g[n + 1] + g[n]),
               l1c = (C * b[n] + B) * b[n];
  const Mat<R> n1a = commutator<R>(S1, C) * S2, n1b = commutator<R>(d.p2(n), C),
               n1c = commutator<R>(S1, B);
  r.nonlocal1 = n1a - n1b + n1c;
  r.R1 = l1a + l1b + l1c - r.nonlocal1;
  r.r1 = {max_abs<R>(r.R1), norm_max<R>({l1a, l1b, l1c, n1a, n1b, n1c})};

  const Mat<R> l2b = g[n] * (C * (b[n] + b[n - 1]) + B),
               l2c = (C * (b[n] + b[n + 1]) + B) * g[n + 1];
  const Mat<R> n2a = g[n] * commutator<R>(S0, C), n2b = commutator<R>(S1, C) * g[n + 1];
  r.nonlocal2 = -n2a + n2b;
  r.R2 = b[n] - l2b + l2c - r.nonlocal2;
  r.r2 = {max_abs<R>(r.R2), norm_max<R>({b[n], l2b, l2c, n2a, n2b})};
  return r;
}

template <class R>
DPIVResidual<R> nonabelian_theorem_residuals(const DPIVData<R>& d, int n) {
  if (max_abs<R>(d.B()) != R(0))
    throw Error(ErrorKind::InvalidModel, "non-Abelian dPIV theorem assumes B = 0");
  return dpiv_residuals<R>(d, n);
}

template <class R>
XiMu<R> commutative_xi_mu(const DPIVData<R>& d, int n) {
  if (n < 0 || n + 1 >= static_cast<int>(d.beta().size()) ||
      n + 1 >= static_cast<int>(d.gamma().size()))
    throw Error(ErrorKind::Shape, "ξ/μ identities need β, γ through n+1");
  require_commuting(d, n);
  const int N = d.dim();
  const Mat<R> I = eye<R>(N);
  auto xi = [&](int k) { return Mat<R>(d.A() / R(2) + R(k) * I + d.C() * d.gamma()[k]); };
  auto mu = [&](int k) { return Mat<R>(d.C() * d.beta()[k] + d.B()); };
  XiMu<R> out;
  out.xi = xi(n);
  out.mu = mu(n);
  const Mat<R> bm = d.beta()[n] * out.mu, x1 = xi(n + 1), x0 = xi(0);
  out.sum = {max_abs<R>(Mat<R>(bm + out.xi + x1)), norm_max<R>({bm, out.xi, x1})};
  const Mat<R> lhs = x1 * x1 - x0 * x0, rhs = d.gamma()[n + 1] * out.mu * mu(n + 1);
  out.dpiv = {max_abs<R>(Mat<R>(lhs - rhs)), norm_max<R>({Mat<R>(x1 * x1), Mat<R>(x0 * x0), rhs})};
  return out;
}

template <class R>
Residual<R> ghr_instance_residual(const DPIVData<R>& d, int n, GHRFactor factor) {
  if (max_abs<R>(d.B()) != R(0))
    throw Error(ErrorKind::InvalidModel, "GHR instance assumes B = 0");
  if (n < 0 || n + 2 >= static_cast<int>(d.gamma().size()))
    throw Error(ErrorKind::Shape, "GHR instance needs γ through n+2");
  require_commuting(d, n + 1);
  const int N = d.dim();
  const Mat<R> I = eye<R>(N);
  auto xi = [&](int k) { return Mat<R>(d.A() / R(2) + R(k) * I + d.C() * d.gamma()[k]); };
  const Mat<R> x0 = xi(0), xn = xi(n), x1 = xi(n + 1), x2 = xi(n + 2);
  const int shift = factor == GHRFactor::Corrected ? n + 1 : n;
  const Mat<R> F = x1 - d.A() / R(2) - R(shift) * I;
  Eigen::JacobiSVD<Mat<R>> svd(F);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > R(1e-12) * std::max(R(1), sv(0))))
    throw Error(ErrorKind::SingularFactor, "GHR factor is singular");
  const Mat<R> lhs = (xn + x1) * (x2 + x1);
  const Mat<R> inner = F.fullPivLu().solve(Mat<R>(x1 * x1 - x0 * x0));
  const Mat<R> rhs = inner * inner;
  return {max_abs<R>(Mat<R>(lhs - rhs)), norm_max<R>({lhs, rhs})};
}

#define MATBIORTH_INSTANTIATE(R)                                                               \
  template class DPIVData<R>;                                                                 \
  template DPIVData<R> make_dpiv_data<R>(const BiorthSystem<R>&, const PearsonData<R>&);      \
  template std::pair<Mat<R>, Mat<R>> partial_sums_from_scratch<R>(const DPIVData<R>&, int);   \
  template DPIVResidual<R> dpiv_residuals<R>(const DPIVData<R>&, int);                        \
  template DPIVResidual<R> nonabelian_theorem_residuals<R>(const DPIVData<R>&, int);          \
  template XiMu<R> commutative_xi_mu<R>(const DPIVData<R>&, int);                             \
  template Residual<R> ghr_instance_residual<R>(const DPIVData<R>&, int, GHRFactor);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
