#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "matbiorth/errors.hpp"

namespace matbiorth {

template <class R>
using Cx = std::complex<R>;

// Square complex matrix of runtime size; every constant matrix of the theory lives here.
template <class R>
using Mat = Eigen::Matrix<Cx<R>, Eigen::Dynamic, Eigen::Dynamic>;

template <class R>
Mat<R> eye(int n) {
  return Mat<R>::Identity(n, n);
}

template <class R>
Mat<R> zeros(int n) {
  return Mat<R>::Zero(n, n);
}

template <class R>
R max_abs(const Mat<R>& a) {
  return a.size() == 0 ? R(0) : a.cwiseAbs().maxCoeff();
}

template <class R>
Mat<R> commutator(const Mat<R>& a, const Mat<R>& b) {
  return a * b - b * a;
}

template <class R>
bool all_finite(const Mat<R>& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const auto& v = a.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

// Solves X·P − Q·X = R through the Kronecker-vectorized system.
// Throws SpectraOverlap when σ(P) and σ(Q) come closer than gap_tol.
template <class R>
Mat<R> solve_sylvester(const Mat<R>& P, const Mat<R>& Q, const Mat<R>& Rhs, R gap_tol = R(1e-8));

// ‖K⁻¹‖∞ for the vectorized operator X ↦ X·P − Q·X; bounds error amplification of a solve.
template <class R>
R sylvester_inverse_norm(const Mat<R>& P, const Mat<R>& Q);

template <class R>
R spectral_gap(const Mat<R>& P, const Mat<R>& Q);

template <class R>
std::vector<Cx<R>> eigenvalues(const Mat<R>& a);

struct ExpFlags {
  bool blow_up = false;
};

// Scaling and squaring with a Taylor core; accurate to working precision for moderate norms.
template <class R>
Mat<R> matrix_exp(const Mat<R>& a, ExpFlags* flags = nullptr);

// log with the cut along [0, ∞): arg ∈ [0, 2π), so real positive z gets the real logarithm.
template <class R>
Cx<R> log_on_cut(Cx<R> z);

// z^A = exp(A log z) with log_on_cut.
template <class R>
Mat<R> matrix_power(const Mat<R>& a, Cx<R> z);

template <class R>
class MatrixPolynomial {
 public:
  MatrixPolynomial() = default;
  explicit MatrixPolynomial(std::vector<Mat<R>> coeffs) : c_(std::move(coeffs)) {}

  static MatrixPolynomial constant(const Mat<R>& a) { return MatrixPolynomial({a}); }
  static MatrixPolynomial zero(int dim) { return MatrixPolynomial({zeros<R>(dim)}); }
  static MatrixPolynomial identity(int dim) { return MatrixPolynomial({eye<R>(dim)}); }
  // a·z^k
  static MatrixPolynomial monomial(const Mat<R>& a, int k) {
    std::vector<Mat<R>> c(k + 1, zeros<R>(static_cast<int>(a.rows())));
    c[k] = a;
    return MatrixPolynomial(std::move(c));
  }

  int dim() const { return c_.empty() ? 0 : static_cast<int>(c_[0].rows()); }
  int size() const { return static_cast<int>(c_.size()); }
  // Formal degree: size() − 1; call trimmed() first for the true degree.
  int degree() const { return size() - 1; }

  const std::vector<Mat<R>>& coeffs() const { return c_; }
  const Mat<R>& operator[](int k) const { return c_[k]; }
  Mat<R>& operator[](int k) { return c_[k]; }

  Mat<R> coeff(int k) const { return (k >= 0 && k < size()) ? c_[k] : zeros<R>(dim()); }

  Mat<R> operator()(Cx<R> z) const {
    Mat<R> acc = zeros<R>(dim());
    for (int k = size() - 1; k >= 0; --k) acc = (acc * z).eval() + c_[k];
    return acc;
  }

  MatrixPolynomial derivative() const {
    if (size() <= 1) return zero(dim());
    std::vector<Mat<R>> d;
    for (int k = 1; k < size(); ++k) d.push_back(c_[k] * R(k));
    return MatrixPolynomial(std::move(d));
  }

  MatrixPolynomial trimmed(R tol = R(0)) const {
    std::vector<Mat<R>> c = c_;
    while (c.size() > 1 && max_abs<R>(c.back()) <= tol) c.pop_back();
    return MatrixPolynomial(std::move(c));
  }

  // this·z^k
  MatrixPolynomial shifted(int k) const {
    std::vector<Mat<R>> c(k, zeros<R>(dim()));
    c.insert(c.end(), c_.begin(), c_.end());
    return MatrixPolynomial(std::move(c));
  }

  MatrixPolynomial transpose() const {
    std::vector<Mat<R>> c;
    for (const auto& m : c_) c.push_back(m.transpose());
    return MatrixPolynomial(std::move(c));
  }

  MatrixPolynomial adjoint() const {
    std::vector<Mat<R>> c;
    for (const auto& m : c_) c.push_back(m.adjoint());
    return MatrixPolynomial(std::move(c));
  }

  bool is_monic(R tol) const {
    const auto t = trimmed(tol);
    return max_abs<R>(Mat<R>(t.c_.back() - eye<R>(dim()))) <= tol;
  }

  R max_coeff() const {
    R m = 0;
    for (const auto& a : c_) m = std::max(m, max_abs<R>(a));
    return m;
  }

  friend MatrixPolynomial operator+(const MatrixPolynomial& a, const MatrixPolynomial& b) {
    const int n = std::max(a.size(), b.size());
    std::vector<Mat<R>> c;
    for (int k = 0; k < n; ++k) c.push_back(a.coeff(k) + b.coeff(k));
    return MatrixPolynomial(std::move(c));
  }
  friend MatrixPolynomial operator-(const MatrixPolynomial& a) {
    std::vector<Mat<R>> c;
    for (const auto& m : a.c_) c.push_back(-m);
    return MatrixPolynomial(std::move(c));
  }
  friend MatrixPolynomial operator-(const MatrixPolynomial& a, const MatrixPolynomial& b) {
    return a + (-b);
  }
  friend MatrixPolynomial operator*(const MatrixPolynomial& a, const MatrixPolynomial& b) {
    std::vector<Mat<R>> c(a.size() + b.size() - 1, zeros<R>(a.dim()));
    for (int i = 0; i < a.size(); ++i)
      for (int j = 0; j < b.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return MatrixPolynomial(std::move(c));
  }
  friend MatrixPolynomial operator*(const Mat<R>& m, const MatrixPolynomial& a) {
    std::vector<Mat<R>> c;
    for (const auto& x : a.c_) c.push_back(m * x);
    return MatrixPolynomial(std::move(c));
  }
  friend MatrixPolynomial operator*(const MatrixPolynomial& a, const Mat<R>& m) {
    std::vector<Mat<R>> c;
    for (const auto& x : a.c_) c.push_back(x * m);
    return MatrixPolynomial(std::move(c));
  }
  friend MatrixPolynomial operator*(Cx<R> s, const MatrixPolynomial& a) {
    std::vector<Mat<R>> c;
    for (const auto& x : a.c_) c.push_back(x * s);
    return MatrixPolynomial(std::move(c));
  }

 private:
  std::vector<Mat<R>> c_;
};

// Largest coefficientwise deviation between two polynomials.
template <class R>
R max_coeff_diff(const MatrixPolynomial<R>& a, const MatrixPolynomial<R>& b) {
  return (a - b).max_coeff();
}

template <class R>
struct BlockMatrix2x2 {
  Mat<R> b11, b12, b21, b22;

  int block_dim() const { return static_cast<int>(b11.rows()); }

  Mat<R> dense() const {
    const int n = block_dim();
    Mat<R> m(2 * n, 2 * n);
    m.topLeftCorner(n, n) = b11;
    m.topRightCorner(n, n) = b12;
    m.bottomLeftCorner(n, n) = b21;
    m.bottomRightCorner(n, n) = b22;
    return m;
  }

  static BlockMatrix2x2 from_dense(const Mat<R>& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    return {m.topLeftCorner(n, n), m.topRightCorner(n, n), m.bottomLeftCorner(n, n),
            m.bottomRightCorner(n, n)};
  }

  friend BlockMatrix2x2 operator*(const BlockMatrix2x2& a, const BlockMatrix2x2& b) {
    return from_dense(a.dense() * b.dense());
  }
  friend BlockMatrix2x2 operator-(const BlockMatrix2x2& a, const BlockMatrix2x2& b) {
    return {a.b11 - b.b11, a.b12 - b.b12, a.b21 - b.b21, a.b22 - b.b22};
  }
  friend BlockMatrix2x2 operator+(const BlockMatrix2x2& a, const BlockMatrix2x2& b) {
    return {a.b11 + b.b11, a.b12 + b.b12, a.b21 + b.b21, a.b22 + b.b22};
  }

  BlockMatrix2x2 inverse() const { return from_dense(dense().inverse()); }
  Cx<R> determinant() const { return dense().determinant(); }
  R max_abs() const { return matbiorth::max_abs<R>(dense()); }
};

template <class R>
BlockMatrix2x2<R> block_diag(const Mat<R>& a, const Mat<R>& d) {
  const int n = static_cast<int>(a.rows());
  return {a, zeros<R>(n), zeros<R>(n), d};
}

// [[0, I], [−I, 0]]; conjugation by it swaps the diagonal blocks.
template <class R>
BlockMatrix2x2<R> swap_matrix(int n) {
  return {zeros<R>(n), eye<R>(n), Mat<R>(-eye<R>(n)), zeros<R>(n)};
}

// 2N×2N polynomial assembled from four N×N polynomial blocks.
template <class R>
MatrixPolynomial<R> block_polynomial(const MatrixPolynomial<R>& a, const MatrixPolynomial<R>& b,
                                     const MatrixPolynomial<R>& c, const MatrixPolynomial<R>& d) {
  const int deg = std::max({a.size(), b.size(), c.size(), d.size()});
  std::vector<Mat<R>> out;
  for (int k = 0; k < deg; ++k)
    out.push_back(BlockMatrix2x2<R>{a.coeff(k), b.coeff(k), c.coeff(k), d.coeff(k)}.dense());
  return MatrixPolynomial<R>(std::move(out));
}

}  // namespace matbiorth
