#include "matbiorth/weights.hpp"

#include <numbers>

namespace matbiorth {

template <class R>
std::vector<Mat<R>> frobenius_series(const MatrixPolynomial<R>& h, int K) {
  const int n = h.dim();
  const Mat<R> A = h.coeff(0);
  std::vector<Mat<R>> H{eye<R>(n)};
  for (int k = 1; k <= K; ++k) {
    Mat<R> rhs = zeros<R>(n);
    for (int j = 1; j <= std::min(k, h.degree()); ++j) rhs += h[j] * H[k - j];
    H.push_back(solve_sylvester<R>(Mat<R>(A + R(k) * eye<R>(n)), A, rhs));
  }
  H.erase(H.begin());
  return H;
}

template <class R>
PearsonSolver<R>::PearsonSolver(MatrixPolynomial<R> h, Mat<R> W0, R radius, R x_end)
    : h_(std::move(h)), W0_(std::move(W0)), radius_(radius) {
  const int n = h_.dim();
  A_ = h_.coeff(0);
  const R eps = std::numeric_limits<R>::epsilon();
  H_.push_back(eye<R>(n));
  int quiet = 0;
  R peak = 1;
  for (int k = 1; k < 600 && quiet < 3; ++k) {
    Mat<R> rhs = zeros<R>(n);
    for (int j = 1; j <= std::min(k, h_.degree()); ++j) rhs += h_[j] * H_[k - j];
    H_.push_back(solve_sylvester<R>(Mat<R>(A_ + R(k) * eye<R>(n)), A_, rhs));
    const R t = max_abs<R>(H_.back()) * std::pow(radius_, R(k));
    peak = std::max(peak, t);
    quiet = (t <= eps * R(1e-3) * peak) ? quiet + 1 : 0;
  }

  // Real-axis anchors from the disk edge outward, until the solution underflows (or x_end,
  // when given); past the last anchor the real-axis value is zero to working precision.
  Cx<R> c(radius_, 0);
  Mat<R> V = series(c, series_terms());
  const R tiny = std::numeric_limits<R>::min();
  while (true) {
    const R x = c.real();
    if (x_end > 0 ? x >= x_end : (x > R(4000) || (max_abs<R>(V) < tiny && x > 4))) break;
    R u = R(0.5) * x;
    std::vector<Mat<R>> coeffs;
    bool ok = false;
    for (int tries = 0; tries < 60 && !ok; ++tries) {
      coeffs = taylor_at(c, V, Cx<R>(u, 0), &ok);
      if (!ok) u /= 2;
    }
    if (!ok) throw Error(ErrorKind::UnsupportedEvaluator, "Taylor continuation failed to converge");
    anchors_.push_back({x, u, coeffs});
    V = horner(coeffs, Cx<R>(u, 0));
    c += u;
    if (!all_finite<R>(V)) break;
  }
  x_end_ = c.real();
}

template <class R>
Mat<R> PearsonSolver<R>::horner(const std::vector<Mat<R>>& v, Cx<R> u) {
  Mat<R> acc = zeros<R>(static_cast<int>(v[0].rows()));
  for (int k = static_cast<int>(v.size()) - 1; k >= 0; --k) acc = (acc * u).eval() + v[k];
  return acc;
}

template <class R>
Mat<R> PearsonSolver<R>::series(Cx<R> z, int K) const {
  const int n = static_cast<int>(A_.rows());
  Mat<R> Hz = zeros<R>(n);
  for (int k = std::min(K, series_terms() - 1); k >= 0; --k) Hz = (Hz * z).eval() + H_[k];
  return Hz * matrix_power<R>(A_, z) * W0_;
}

template <class R>
Mat<R> PearsonSolver<R>::truncated(Cx<R> z, int K) const {
  const int n = static_cast<int>(A_.rows());
  Mat<R> Hz = zeros<R>(n);
  const auto H = frobenius_series<R>(h_, K);
  for (int k = K; k >= 1; --k) Hz = ((Hz + H[k - 1]) * z).eval();
  Hz += eye<R>(n);
  return Hz * matrix_power<R>(A_, z) * W0_;
}

// Taylor coefficients of W(c + s) in s from (c + s)·W′ = h(c + s)·W.
template <class R>
std::vector<Mat<R>> PearsonSolver<R>::taylor_at(Cx<R> c, const Mat<R>& V0, Cx<R> u,
                                                bool* converged) const {
  const int d = h_.degree();
  // h(c + s) re-expanded in s.
  std::vector<Mat<R>> g(d + 1, zeros<R>(h_.dim()));
  for (int j = 0; j <= d; ++j) {
    for (int i = j; i >= 0; --i) {
      R binom = 1;
      for (int t = 0; t < i; ++t) binom = binom * R(j - t) / R(t + 1);
      g[i] += h_[j] * (binom * std::pow(c, j - i));
    }
  }
  const int KT = 48;
  std::vector<Mat<R>> V{V0};
  R peak = max_abs<R>(V0);
  const R au = std::abs(u);
  for (int k = 0; k < KT; ++k) {
    Mat<R> s = -R(k) * V[k];
    for (int j = 0; j <= std::min(k, d); ++j) s += g[j] * V[k - j];
    V.push_back(s / (c * R(k + 1)));
    peak = std::max(peak, max_abs<R>(V.back()) * std::pow(au, R(k + 1)));
  }
  const R eps = std::numeric_limits<R>::epsilon();
  const R t1 = max_abs<R>(V[KT]) * std::pow(au, R(KT));
  const R t2 = max_abs<R>(V[KT - 1]) * std::pow(au, R(KT - 1));
  // Decaying solutions have alternating Taylor terms; cap the cancellation at the far end.
  const R end = max_abs<R>(horner(V, u));
  *converged = std::isfinite(peak) && t1 + t2 <= eps * R(0.01) * peak &&
               (peak <= 8 * end || end < std::numeric_limits<R>::min());
  return V;
}

template <class R>
Mat<R> PearsonSolver<R>::at_real(R x) const {
  if (x <= radius_) return series(Cx<R>(x, 0), series_terms());
  if (x < x_end_) {
    // anchors are sorted by c; find the last with c ≤ x
    std::size_t lo = 0, hi = anchors_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (anchors_[mid].c <= x) lo = mid;
      else hi = mid;
    }
    return horner(anchors_[lo].taylor, Cx<R>(x - anchors_[lo].c, 0));
  }
  return zeros<R>(static_cast<int>(A_.rows()));
}

template <class R>
Mat<R> PearsonSolver<R>::at_complex(Cx<R> z) const {
  const R r = std::abs(z);
  if (r <= radius_) return series(z, series_terms());
  const Cx<R> dir = z / r;
  Cx<R> c = dir * radius_;
  Mat<R> V = series(c, series_terms());
  R pos = radius_;
  while (pos < r) {
    R u = std::min(r - pos, R(0.5) * pos);
    std::vector<Mat<R>> coeffs;
    bool ok = false;
    for (int tries = 0; tries < 60 && !ok; ++tries) {
      coeffs = taylor_at(c, V, dir * u, &ok);
      if (!ok) u /= 2;
    }
    if (!ok) throw Error(ErrorKind::UnsupportedEvaluator, "Taylor continuation failed to converge");
    V = horner(coeffs, dir * u);
    pos += u;
    c = dir * pos;
  }
  return V;
}

namespace {

template <class R>
R max_real_eig(const Mat<R>& a) {
  R m = -std::numeric_limits<R>::infinity();
  for (const auto& e : eigenvalues<R>(a)) m = std::max(m, e.real());
  return m;
}

template <class R>
R min_real_eig(const Mat<R>& a) {
  R m = std::numeric_limits<R>::infinity();
  for (const auto& e : eigenvalues<R>(a)) m = std::min(m, e.real());
  return m;
}

template <class R>
R max_imag_eig(const Mat<R>& a) {
  R m = 0;
  for (const auto& e : eigenvalues<R>(a)) m = std::max(m, std::abs(e.imag()));
  return m;
}

}  // namespace

template <class R>
void WeightModel<R>::validate() const {
  const int n = pearson_.dim();
  if (n < 1 || pearson_.hR.dim() != n || pearson_.W0L.rows() != n || pearson_.W0R.rows() != n)
    throw Error(ErrorKind::InvalidModel, "inconsistent dimensions");
  if (pearson_.degree() > 2) throw Error(ErrorKind::InvalidModel, "Pearson data of degree > 2");
  for (const Mat<R>& A : {pearson_.AL(), pearson_.AR()}) {
    if (max_imag_eig<R>(A) > R(1e-10))
      throw Error(ErrorKind::InvalidModel, "h(0) must have real spectrum");
    if (min_real_eig<R>(A) <= R(-1))
      throw Error(ErrorKind::InvalidModel, "h(0) has an eigenvalue ≤ −1");
  }
  if (min_real_eig<R>(pearson_.AL()) + min_real_eig<R>(pearson_.AR()) <= R(-1))
    throw Error(ErrorKind::InvalidModel, "weight is not integrable at the origin");
  const int d = pearson_.degree();
  if (d < 1) throw Error(ErrorKind::InvalidModel, "constant Pearson data gives no decay");
  const Mat<R> lead = pearson_.hL.coeff(d) + pearson_.hR.coeff(d);
  if (max_real_eig<R>(lead) >= 0)
    throw Error(ErrorKind::InvalidModel, "leading Pearson coefficient does not give decay");
  if (std::abs(pearson_.W0L.determinant()) == R(0) || std::abs(pearson_.W0R.determinant()) == R(0))
    throw Error(ErrorKind::InvalidModel, "singular seed matrix");
}

template <class R>
void WeightModel<R>::finalize() {
  origin_exponent_ = min_real_eig<R>(pearson_.AL()) + min_real_eig<R>(pearson_.AR());
  if (!closed_form_) {
    left_ = std::make_shared<PearsonSolver<R>>(pearson_.hL, pearson_.W0L);
    if (!pearson_.one_sided() || max_abs<R>(Mat<R>(pearson_.W0R - eye<R>(dim()))) > 0)
      right_t_ = std::make_shared<PearsonSolver<R>>(pearson_.hR.transpose(),
                                                    Mat<R>(pearson_.W0R.transpose()));
  }
}

template <class R>
WeightModel<R> WeightModel<R>::duran_grunbaum(const Mat<R>& A1, const Mat<R>& A2,
                                              const Mat<R>& alpha) {
  if (max_abs<R>(commutator<R>(alpha, A1)) > R(1e-12) ||
      max_abs<R>(commutator<R>(alpha, A2)) > R(1e-12))
    throw Error(ErrorKind::InvalidModel, "α must commute with A₁ and A₂");
  WeightModel m;
  const int n = static_cast<int>(A1.rows());
  m.kind_ = EvaluatorKind::DuranGrunbaum;
  m.p1_ = A1;
  m.p2_ = A2;
  m.p3_ = alpha;
  m.scale_ = eye<R>(n);
  m.closed_form_ = true;
  const Mat<R> half = alpha / R(2);
  m.pearson_ = {MatrixPolynomial<R>({half, A1}), MatrixPolynomial<R>({half, A2}), eye<R>(n),
                eye<R>(n)};
  m.validate();
  m.finalize();
  return m;
}

template <class R>
WeightModel<R> WeightModel<R>::freud_ray(const Mat<R>& A, const Mat<R>& B, const Mat<R>& C,
                                         std::optional<Mat<R>> W0) {
  WeightModel m;
  const int n = static_cast<int>(A.rows());
  m.kind_ = EvaluatorKind::FreudRay;
  m.p1_ = A;
  m.p2_ = B;
  m.p3_ = C;
  m.scale_ = eye<R>(n);
  const R tol = R(1e-14) * (R(1) + max_abs<R>(A) + max_abs<R>(B) + max_abs<R>(C));
  m.closed_form_ = max_abs<R>(commutator<R>(A, B)) <= tol &&
                   max_abs<R>(commutator<R>(A, C)) <= tol &&
                   max_abs<R>(commutator<R>(B, C)) <= tol;
  m.pearson_ = {MatrixPolynomial<R>({A, B, C}), MatrixPolynomial<R>::zero(n),
                W0 ? *W0 : eye<R>(n), eye<R>(n)};
  m.validate();
  m.finalize();
  return m;
}

template <class R>
WeightModel<R> WeightModel<R>::frobenius(const PearsonData<R>& p, bool allow_continuation) {
  WeightModel m;
  m.kind_ = EvaluatorKind::FrobeniusSeries;
  m.pearson_ = p;
  m.scale_ = eye<R>(p.dim());
  m.allow_continuation_ = allow_continuation;
  m.validate();
  m.finalize();
  return m;
}

template <class R>
WeightModel<R> WeightModel<R>::with_pearson(const PearsonData<R>& p) const {
  WeightModel m = *this;
  m.pearson_ = p;
  return m;
}

template <class R>
WeightModel<R> WeightModel<R>::scaled(R c) const {
  WeightModel m = *this;
  m.scale_ = scale_ * c;
  return m;
}

template <class R>
std::string WeightModel<R>::kind_name() const {
  switch (kind_) {
    case EvaluatorKind::DuranGrunbaum: return "duran_grunbaum";
    case EvaluatorKind::FreudRay: return "freud_ray";
    case EvaluatorKind::FrobeniusSeries: return "frobenius_series";
  }
  return "";
}

template <class R>
Mat<R> WeightModel<R>::WL(Cx<R> z) const {
  if (z == Cx<R>(0)) throw Error(ErrorKind::ZeroArgument, "weight factor at the origin");
  if (kind_ == EvaluatorKind::DuranGrunbaum)
    return scale_ * matrix_exp<R>(Mat<R>(p1_ * z)) * matrix_power<R>(Mat<R>(p3_ / R(2)), z);
  if (closed_form_) {
    return scale_ * matrix_exp<R>(Mat<R>(p2_ * z + p3_ * (z * z / R(2)))) *
           matrix_power<R>(p1_, z) * pearson_.W0L;
  }
  if (!allow_continuation_ && std::abs(z) > left_->radius())
    throw Error(ErrorKind::UnsupportedEvaluator, "outside the Frobenius disk");
  const bool real_axis = z.imag() == R(0) && z.real() > 0;
  return scale_ * (real_axis ? left_->at_real(z.real()) : left_->at_complex(z));
}

template <class R>
Mat<R> WeightModel<R>::WR(Cx<R> z) const {
  if (z == Cx<R>(0)) throw Error(ErrorKind::ZeroArgument, "weight factor at the origin");
  if (kind_ == EvaluatorKind::DuranGrunbaum)
    return matrix_power<R>(Mat<R>(p3_ / R(2)), z) * matrix_exp<R>(Mat<R>(p2_ * z));
  if (!right_t_) return eye<R>(dim());
  if (!allow_continuation_ && std::abs(z) > right_t_->radius())
    throw Error(ErrorKind::UnsupportedEvaluator, "outside the Frobenius disk");
  const bool real_axis = z.imag() == R(0) && z.real() > 0;
  return (real_axis ? right_t_->at_real(z.real()) : right_t_->at_complex(z)).transpose();
}

template <class R>
Mat<R> WeightModel<R>::eval(R x) const {
  if (!(x > 0)) throw Error(ErrorKind::ZeroArgument, "weight evaluated at x ≤ 0");
  if (kind_ == EvaluatorKind::DuranGrunbaum)
    return scale_ * matrix_exp<R>(Mat<R>(p1_ * x)) * matrix_power<R>(p3_, Cx<R>(x, 0)) *
           matrix_exp<R>(Mat<R>(p2_ * x));
  return WL(Cx<R>(x, 0)) * WR(Cx<R>(x, 0));
}

template <class R>
Mat<R> WeightModel<R>::eval_derivative(R x) const {
  const Mat<R> w = eval(x);
  const Cx<R> z(x, 0);
  return (pearson_.hL(z) * w + w * pearson_.hR(z)) / x;
}

namespace {

// Aitken Δ² on the last three samples, entrywise; falls back to the last sample.
template <class R>
Mat<R> aitken(const Mat<R>& a, const Mat<R>& b, const Mat<R>& c) {
  Mat<R> out = c;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const Cx<R> d1 = b(i) - a(i), d2 = c(i) - b(i);
    const Cx<R> den = d2 - d1;
    if (std::abs(den) > std::numeric_limits<R>::epsilon() * (std::abs(a(i)) + std::abs(c(i))) &&
        std::abs(d2) < std::abs(d1))
      out(i) = c(i) - d2 * d2 / den;
  }
  return out;
}

// Iterated Δ²: removes several geometric rates, e.g. the mixed powers of x^A near 0.
template <class R>
Mat<R> aitken_limit(std::vector<Mat<R>> v) {
  while (v.size() >= 3) {
    std::vector<Mat<R>> next;
    for (std::size_t i = 0; i + 2 < v.size(); ++i) next.push_back(aitken<R>(v[i], v[i + 1], v[i + 2]));
    v = std::move(next);
  }
  return v.back();
}

}  // namespace

template <class R>
BoundaryReport<R> check_boundary_conditions(const WeightModel<R>& model, R tol) {
  const auto& p = model.pearson();
  const int n = model.dim();
  auto aL = [&](R x) { return Mat<R>(R(2) * p.hL(Cx<R>(x, 0)) + eye<R>(n)); };
  auto aR = [&](R x) { return Mat<R>(R(2) * p.hR(Cx<R>(x, 0)) + eye<R>(n)); };
  // (zW)′ = W + zW′ with zW′ from the Pearson equation
  auto dzW = [&](R x) { return Mat<R>(model.eval(x) + x * model.eval_derivative(x)); };
  std::vector<std::pair<std::string, std::function<Mat<R>(R)>>> exprs = {
      {"zW", [&](R x) { return Mat<R>(x * model.eval(x)); }},
      {"(zW)'-aL*W", [&](R x) { return Mat<R>(dzW(x) - aL(x) * model.eval(x)); }},
      {"(zW)'-W*aR", [&](R x) { return Mat<R>(dzW(x) - model.eval(x) * aR(x)); }},
  };
  std::vector<R> near, far;
  for (int k = 2; k <= 8; ++k) near.push_back(std::pow(R(10), R(-k)));
  for (R X : {R(10), R(20), R(30), R(40), R(50)}) far.push_back(X);

  BoundaryReport<R> report;
  for (const auto& [name, f] : exprs) {
    std::vector<Mat<R>> vn, vf;
    R sup = 0;
    for (R x : near) vn.push_back(f(x)), sup = std::max(sup, max_abs<R>(vn.back()));
    for (R x : far) vf.push_back(f(x)), sup = std::max(sup, max_abs<R>(vf.back()));
    const Mat<R> l0 = aitken_limit<R>(vn);
    const Mat<R> linf = aitken_limit<R>(vf);
    const R lim0 = max_abs<R>(l0), liminf = max_abs<R>(linf);
    const bool pass = all_finite<R>(l0) && all_finite<R>(linf) &&
                      max_abs<R>(Mat<R>(linf - l0)) <= tol * std::max(R(1), sup);
    report.conditions.push_back({name, lim0, liminf, sup, pass});
  }
  return report;
}

namespace {

template <class R>
Mat<R> n_transform_at(const MatrixPolynomial<R>& h, R x) {
  const Cx<R> z(x, 0);
  const Mat<R> hz = h(z);
  return h.derivative()(z) + hz * hz / x;
}

}  // namespace

template <class R>
std::pair<Mat<R>, Mat<R>> weight_second_order_residual(const WeightModel<R>& model, R x, R step) {
  const auto& p = model.pearson();
  const int n = model.dim();
  const R h = std::min(step, x / 4);
  auto aL = [&](R t) { return Mat<R>(R(2) * p.hL(Cx<R>(t, 0)) + eye<R>(n)); };
  auto aR = [&](R t) { return Mat<R>(R(2) * p.hR(Cx<R>(t, 0)) + eye<R>(n)); };
  Mat<R> W[5], F[5], GL[5], GR[5];
  for (int i = 0; i < 5; ++i) {
    const R t = x + R(i - 2) * h;
    W[i] = model.eval(t);
    F[i] = t * W[i];
    GL[i] = aL(t) * W[i];
    GR[i] = W[i] * aR(t);
  }
  const Mat<R> F2 = (-F[4] + R(16) * F[3] - R(30) * F[2] + R(16) * F[1] - F[0]) / (R(12) * h * h);
  const Mat<R> GL1 = (-GL[4] + R(8) * GL[3] - R(8) * GL[1] + GL[0]) / (R(12) * h);
  const Mat<R> GR1 = (-GR[4] + R(8) * GR[3] - R(8) * GR[1] + GR[0]) / (R(12) * h);
  const Mat<R> bL = n_transform_at<R>(p.hL, x), bR = n_transform_at<R>(p.hR, x);
  const Mat<R> r1 = F2 - GL1 + bL * W[2] - W[2] * bR;
  const Mat<R> r2 = F2 - GR1 + W[2] * bR - bL * W[2];
  return {r1, r2};
}

template <class R>
Mat<R> pearson_residual(const WeightModel<R>& model, R x, R step) {
  const auto& p = model.pearson();
  const R h = std::min(step, x / 4);
  Mat<R> W[5];
  for (int i = 0; i < 5; ++i) W[i] = model.eval(x + R(i - 2) * h);
  const Mat<R> d = (-W[4] + R(8) * W[3] - R(8) * W[1] + W[0]) / (R(12) * h);
  const Cx<R> z(x, 0);
  return x * d - p.hL(z) * W[2] - W[2] * p.hR(z);
}

#define MATBIORTH_INSTANTIATE(R)                                                            \
  template std::vector<Mat<R>> frobenius_series<R>(const MatrixPolynomial<R>&, int);       \
  template class PearsonSolver<R>;                                                         \
  template class WeightModel<R>;                                                           \
  template BoundaryReport<R> check_boundary_conditions<R>(const WeightModel<R>&, R);       \
  template std::pair<Mat<R>, Mat<R>> weight_second_order_residual<R>(const WeightModel<R>&, \
                                                                     R, R);                 \
  template Mat<R> pearson_residual<R>(const WeightModel<R>&, R, R);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
