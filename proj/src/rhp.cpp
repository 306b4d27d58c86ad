#include "matbiorth/rhp.hpp"

#include <numbers>

namespace matbiorth {

namespace {

template <class R>
using Poly = MatrixPolynomial<R>;

template <class R>
Poly<R> block_of(const Poly<R>& p, int i, int j, int N) {
  std::vector<Mat<R>> c;
  for (int k = 0; k < p.size(); ++k) c.push_back(p[k].block(i * N, j * N, N, N));
  return Poly<R>(std::move(c));
}

template <class R>
Poly<R> poly(std::initializer_list<Mat<R>> c) {
  return Poly<R>(std::vector<Mat<R>>(c));
}

// (P − P(0))/z
template <class R>
Poly<R> drop_constant(const Poly<R>& p) {
  if (p.size() <= 1) return Poly<R>::zero(p.dim());
  return Poly<R>(std::vector<Mat<R>>(p.coeffs().begin() + 1, p.coeffs().end()));
}

// S = [0 −I; I 0]
template <class R>
Mat<R> s_matrix(int N) {
  return BlockMatrix2x2<R>{zeros<R>(N), Mat<R>(-eye<R>(N)), eye<R>(N), zeros<R>(N)}.dense();
}

template <class R>
R poly_scale(std::initializer_list<R> xs) {
  R m = 0;
  for (R x : xs) m = std::max(m, x);
  return m;
}

template <class R>
void require_frame_degree(const BiorthSystem<R>& sys, int n) {
  if (n < 1 || n > sys.n_max) throw Error(ErrorKind::Shape, "degree outside 1..n_max");
}

template <class R>
Poly<R> structure_entries(const BiorthSystem<R>& s, const PearsonData<R>& p, int n) {
  const int N = s.dim;
  const Mat<R> I = eye<R>(N), O = zeros<R>(N);
  const Mat<R> AL = p.hL.coeff(0), BL = p.hL.coeff(1), CL = p.hL.coeff(2);
  const Mat<R> AR = p.hR.coeff(0), BR = p.hR.coeff(1), CR = p.hR.coeff(2);
  auto pL = [&](int m, int j) { return j == 1 ? s.p1L(m) : s.p2L(m); };
  auto pR = [&](int m, int j) { return j == 1 ? s.p1R(m) : s.p2R(m); };
  auto qL = [&](int m, int j) { return j == 1 ? s.qL1[m] : s.qL2[m]; };
  auto qR = [&](int m, int j) { return j == 1 ? s.qR1[m] : s.qR2[m]; };
  const Mat<R>& Ci = s.Cinv[n];
  const Mat<R>& Cm = s.C[n - 1];
  const R nn = R(n);

  const Poly<R> m11 = poly<R>({Mat<R>(Ci * CR * Cm + AL + BL * qR(n - 1, 1) + pL(n, 1) * BL +
                                      CL * qR(n - 1, 2) + pL(n, 2) * CL +
                                      pL(n, 1) * CL * qR(n - 1, 1) + nn * I),
                               Mat<R>(BL + CL * qR(n - 1, 1) + pL(n, 1) * CL), CL});
  const Poly<R> m12 =
      poly<R>({Mat<R>((BL + CL * qR(n, 1) + pL(n, 1) * CL) * Ci +
                      Ci * (BR + CR * pR(n, 1) + qL(n, 1) * CR)),
               Mat<R>(CL * Ci + Ci * CR), O});
  const Poly<R> m21 =
      poly<R>({Mat<R>(-Cm * (BL + CL * qR(n - 1, 1) + pL(n - 1, 1) * CL) -
                      (BR + CR * pR(n - 1, 1) + qL(n - 1, 1) * CR) * Cm),
               Mat<R>(-Cm * CL - CR * Cm), O});
  const Poly<R> m22 = poly<R>({Mat<R>(-Cm * CL * Ci - AR - BR * pR(n, 1) - qL(n - 1, 1) * BR -
                                      CR * pR(n, 2) - qL(n - 1, 2) * CR -
                                      qL(n - 1, 1) * CR * pR(n, 1) - nn * I),
                               Mat<R>(-BR - CR * pR(n, 1) - qL(n - 1, 1) * CR), Mat<R>(-CR)});
  return block_polynomial<R>(m11, m12, m21, m22);
}

template <class R>
Poly<R> structure_expansion(const BiorthSystem<R>& s, const PearsonData<R>& p, int n) {
  const int N = s.dim;
  const Mat<R> I = eye<R>(N), O = zeros<R>(N);
  auto bd = [](const Mat<R>& a, const Mat<R>& b, const Mat<R>& c, const Mat<R>& d) {
    return BlockMatrix2x2<R>{a, b, c, d}.dense();
  };
  const Mat<R> Y1 = bd(s.p1L(n), -s.Cinv[n], -s.C[n - 1], s.qL1[n - 1]);
  const Mat<R> Y2 =
      bd(s.p2L(n), -s.Cinv[n] * s.qL1[n], -s.C[n - 1] * s.p1L(n - 1), s.qL2[n - 1]);
  Mat<R> K[3];
  for (int j = 0; j < 3; ++j) K[j] = bd(p.hL.coeff(j), O, O, -p.hR.coeff(j));
  const Mat<R> D = bd(R(n) * I, O, O, -R(n) * I);
  const Mat<R> c0 = D + K[0] + commutator<R>(Y1, K[1]) + commutator<R>(Y2, K[2]) +
                    K[2] * Y1 * Y1 - Y1 * K[2] * Y1;
  const Mat<R> c1 = K[1] + commutator<R>(Y1, K[2]);
  return poly<R>({c0, c1, K[2]});
}

}  // namespace

template <class R>
std::vector<Cx<R>> z_ring() {
  std::vector<Cx<R>> zs;
  const R pi = std::numbers::pi_v<R>;
  for (R r : {R(0.5), R(2), R(8)})
    for (int k = 1; k <= 7; ++k) zs.push_back(std::polar(r, R(k) * pi / R(4)));
  return zs;
}

template <class R>
BlockMatrix2x2<R> assemble_Y(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                             Side side, Cx<R> z, int d) {
  require_frame_degree(sys, n);
  auto diff = [d](Poly<R> p) {
    for (int k = 0; k < d; ++k) p = p.derivative();
    return p;
  };
  const Mat<R>& Cm = sys.C[n - 1];
  if (side == Side::Left)
    return {diff(sys.PL[n])(z), q.L(n, d), Mat<R>(-Cm * diff(sys.PL[n - 1])(z)),
            Mat<R>(-Cm * q.L(n - 1, d))};
  return {diff(sys.PR[n])(z), Mat<R>(-diff(sys.PR[n - 1])(z) * Cm), q.Rt(n, d),
          Mat<R>(-q.Rt(n - 1, d) * Cm)};
}

template <class R>
BlockMatrix2x2<R> assemble_Y(const BiorthSystem<R>& sys, const SecondKindEvaluator<R>& ev, int n,
                             Side side, Cx<R> z) {
  require_frame_degree(sys, n);
  return assemble_Y<R>(sys, ev.evaluate(z, n - 1, n, 0), n, side, z, 0);
}

template <class R>
FundamentalFrame<R> make_frame(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                               Side side, Cx<R> z) {
  FundamentalFrame<R> f;
  f.n = n;
  f.side = side;
  f.z = z;
  f.Y = assemble_Y<R>(sys, q, n, side, z, 0);
  f.dY = assemble_Y<R>(sys, q, n, side, z, 1);
  f.d2Y = assemble_Y<R>(sys, q, n, side, z, 2);
  return f;
}

template <class R>
R det_residual(const FundamentalFrame<R>& f) {
  return std::abs(f.Y.determinant() - Cx<R>(1));
}

template <class R>
R normalization_residual(const FundamentalFrame<R>& f) {
  const int N = f.Y.block_dim();
  const auto D = block_diag<R>(Mat<R>(eye<R>(N) * std::pow(f.z, -f.n)),
                               Mat<R>(eye<R>(N) * std::pow(f.z, f.n)));
  const auto P = f.side == Side::Left ? f.Y * D : D * f.Y;
  return max_abs<R>(Mat<R>(P.dense() - eye<R>(2 * N)));
}

template <class R>
std::array<Residual<R>, 3> corollary_identities(const BiorthSystem<R>& sys,
                                                const SecondKindValues<R>& q, int n, Cx<R> z,
                                                const Mat<R>* cinv_override) {
  require_frame_degree(sys, n);
  const Mat<R>& ci = cinv_override ? *cinv_override : sys.Cinv[n - 1];
  const Mat<R> PLn = sys.PL[n](z), PLm = sys.PL[n - 1](z);
  const Mat<R> PRn = sys.PR[n](z), PRm = sys.PR[n - 1](z);
  const Mat<R>&QLn = q.L(n), &QLm = q.L(n - 1), &QRn = q.Rt(n), &QRm = q.Rt(n - 1);
  std::array<Residual<R>, 3> out;
  const Mat<R> a1 = QLn * PRm, b1 = PLn * QRm;
  const Mat<R> a2 = PLm * QRn, b2 = QLm * PRn;
  const Mat<R> a3 = QLn * PRn, b3 = PLn * QRn;
  out[0] = {max_abs<R>(Mat<R>(a1 - b1 - ci)),
            poly_scale<R>({max_abs<R>(a1), max_abs<R>(b1), max_abs<R>(ci)})};
  out[1] = {max_abs<R>(Mat<R>(a2 - b2 - ci)),
            poly_scale<R>({max_abs<R>(a2), max_abs<R>(b2), max_abs<R>(ci)})};
  out[2] = {max_abs<R>(Mat<R>(a3 - b3)), poly_scale<R>({max_abs<R>(a3), max_abs<R>(b3)})};
  return out;
}

template <class R>
Residual<R> inverse_consistency(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                                Cx<R> z) {
  const auto YL = assemble_Y<R>(sys, q, n, Side::Left, z);
  const auto YR = assemble_Y<R>(sys, q, n, Side::Right, z);
  const Mat<R> J = swap_matrix<R>(sys.dim).dense();
  const Mat<R> inv = J * YR.dense() * (-J);
  const Mat<R> prod = YL.dense() * inv;
  return {max_abs<R>(Mat<R>(prod - eye<R>(2 * sys.dim))),
          std::max(YL.max_abs(), max_abs<R>(inv))};
}

template <class R>
MatrixPolynomial<R> transfer_polynomial(const BiorthSystem<R>& sys, int n, Side side) {
  if (n < 0 || n >= sys.n_max) throw Error(ErrorKind::Shape, "transfer needs n < n_max");
  const int N = sys.dim;
  const Mat<R> I = eye<R>(N), O = zeros<R>(N);
  const Mat<R>& b = side == Side::Left ? sys.betaL[n] : sys.betaR[n];
  const Mat<R> c0 = side == Side::Left ? BlockMatrix2x2<R>{Mat<R>(-b), sys.Cinv[n],
                                                          Mat<R>(-sys.C[n]), O}.dense()
                                       : BlockMatrix2x2<R>{Mat<R>(-b), Mat<R>(-sys.C[n]),
                                                           sys.Cinv[n], O}.dense();
  const Mat<R> c1 = BlockMatrix2x2<R>{I, O, O, O}.dense();
  return poly<R>({c0, c1});
}

template <class R>
BlockMatrix2x2<R> transfer_matrix(const BiorthSystem<R>& sys, int n, Side side, Cx<R> z) {
  return BlockMatrix2x2<R>::from_dense(transfer_polynomial<R>(sys, n, side)(z));
}

template <class R>
Residual<R> transfer_residual(const BiorthSystem<R>& sys, const SecondKindValues<R>& q, int n,
                              Side side, Cx<R> z) {
  const auto Yn = assemble_Y<R>(sys, q, n, side, z);
  const auto Y1 = assemble_Y<R>(sys, q, n + 1, side, z);
  const auto T = transfer_matrix<R>(sys, n, side, z);
  const auto TY = side == Side::Left ? T * Yn : Yn * T;
  return {(Y1 - TY).max_abs(), std::max(Y1.max_abs(), TY.max_abs())};
}

template <class R>
StructureMatrix<R> structure_matrix_explicit(const BiorthSystem<R>& sys,
                                             const PearsonData<R>& pearson, int n, Side side,
                                             StructureForm form) {
  require_frame_degree(sys, n);
  if (pearson.degree() > 2)
    throw Error(ErrorKind::Shape, "explicit structure matrix needs deg h ≤ 2");
  StructureMatrix<R> m;
  m.n = n;
  m.side = side;
  m.Mtilde = form == StructureForm::Entries ? structure_entries<R>(sys, pearson, n)
                                            : structure_expansion<R>(sys, pearson, n);
  if (side == Side::Right) {
    const Mat<R> S = s_matrix<R>(sys.dim);
    m.Mtilde = S * m.Mtilde * S;  // −S·M·S⁻¹ with S⁻¹ = −S
  }
  m.pole_residue = BlockMatrix2x2<R>::from_dense(m.Mtilde.coeff(0));
  return m;
}

template <class R>
BlockMatrix2x2<R> constant_jump_matrix(const SecondKindEvaluator<R>& ev, int n, Side side,
                                       Cx<R> z) {
  const auto Y = assemble_Y<R>(ev.system(), ev, n, side, z);
  const auto& model = ev.model();
  const Mat<R> WL = model.WL(z), WR = model.WR(z);
  if (side == Side::Left) return Y * block_diag<R>(WL, Mat<R>(WR.inverse()));
  return block_diag<R>(WR, Mat<R>(WL.inverse())) * Y;
}

template <class R>
BlockMatrix2x2<R> structure_matrix_numeric(const SecondKindEvaluator<R>& ev, int n, Side side,
                                           Cx<R> z, R step) {
  if (distance_to_support<R>(z) <= R(0.01) + 2 * step)
    throw Error(ErrorKind::TooCloseToSupport, "stencil reaches the ray");
  auto Z = [&](Cx<R> w) { return constant_jump_matrix<R>(ev, n, side, w).dense(); };
  auto central = [&](R h) { return Mat<R>((Z(z + h) - Z(z - h)) / (R(2) * h)); };
  const Mat<R> dZ = (R(4) * central(step / 2) - central(step)) / R(3);
  const Mat<R> Zi = Z(z).inverse();
  const Mat<R> M = side == Side::Left ? Mat<R>(dZ * Zi) : Mat<R>(Zi * dZ);
  return BlockMatrix2x2<R>::from_dense(Mat<R>(z * M));
}

template <class R>
BlockMatrix2x2<R> laurent_residue(const SecondKindEvaluator<R>& ev, int n, Side side, R r,
                                  int points, R step) {
  const R pi = std::numbers::pi_v<R>;
  const int N = ev.system().dim;
  Mat<R> acc = zeros<R>(2 * N);
  for (int k = 0; k < points; ++k) {
    const Cx<R> z = std::polar(r, R(2) * pi * (R(k) + R(0.5)) / R(points));
    // (1/2πi)∮M dz = mean of z·M(z) over the nodes
    acc += structure_matrix_numeric<R>(ev, n, side, z, step).dense();
  }
  return BlockMatrix2x2<R>::from_dense(Mat<R>(acc / R(points)));
}

template <class R>
PolynomialResidual<R> zero_curvature_residual(const BiorthSystem<R>& sys,
                                            const PearsonData<R>& pearson, int n, Side side) {
  const auto T = transfer_polynomial<R>(sys, n, side);
  const auto M0 = structure_matrix_explicit<R>(sys, pearson, n, side).Mtilde;
  const auto M1 = structure_matrix_explicit<R>(sys, pearson, n + 1, side).Mtilde;
  const int N = sys.dim;
  const Mat<R> E = BlockMatrix2x2<R>{eye<R>(N), zeros<R>(N), zeros<R>(N), zeros<R>(N)}.dense();
  const auto zE = Poly<R>::monomial(E, 1);
  const Poly<R> a = side == Side::Left ? M1 * T : T * M1;
  const Poly<R> b = side == Side::Left ? T * M0 : M0 * T;
  return {a - b - zE, std::max(a.max_coeff(), b.max_coeff())};
}

template <class R>
Mat<R> NTransform<R>::operator()(Cx<R> z) const {
  if (z == Cx<R>(0)) {
    if (has_pole()) throw Error(ErrorKind::PoleAtZero, "N-transform has a pole at 0");
    return regular(z);
  }
  return regular(z) + residue / z;
}

template <class R>
NTransform<R> n_transform(const MatrixPolynomial<R>& F) {
  const Poly<R> sq = F * F;
  return {F.derivative() + drop_constant<R>(sq), sq.coeff(0)};
}

template <class R>
Mat<R> n_transform(const std::function<Mat<R>(Cx<R>)>& F, Cx<R> z, R step) {
  if (z == Cx<R>(0)) throw Error(ErrorKind::PoleAtZero, "N-transform evaluated at 0");
  auto central = [&](R h) { return Mat<R>((F(z + h) - F(z - h)) / (R(2) * h)); };
  const Mat<R> d = (R(4) * central(step / 2) - central(step)) / R(3);
  const Mat<R> f = F(z);
  return d + f * f / z;
}

template <class R>
Residual<R> first_order_ode_residual(const FundamentalFrame<R>& f, const PearsonData<R>& p,
                                     const StructureMatrix<R>& m) {
  const Cx<R> z = f.z;
  const Mat<R> Y = f.Y.dense(), dY = f.dY.dense();
  const Mat<R> Mt = m.Mtilde(z);
  Mat<R> zdY = z * dY, a, b;
  if (f.side == Side::Left) {
    a = Y * block_diag<R>(p.hL(z), Mat<R>(-p.hR(z))).dense();
    b = Mt * Y;
  } else {
    a = block_diag<R>(p.hR(z), Mat<R>(-p.hL(z))).dense() * Y;
    b = Y * Mt;
  }
  return {max_abs<R>(Mat<R>(zdY + a - b)),
          poly_scale<R>({max_abs<R>(zdY), max_abs<R>(a), max_abs<R>(b)})};
}

template <class R>
Residual<R> second_order_ode_residual(const FundamentalFrame<R>& f, const PearsonData<R>& p,
                                      const StructureMatrix<R>& m) {
  const Cx<R> z = f.z;
  const int N = p.dim();
  const Mat<R> I = eye<R>(N);
  const Mat<R> Y = f.Y.dense(), dY = f.dY.dense(), d2Y = f.d2Y.dense();
  const Mat<R> NM = n_transform<R>(m.Mtilde)(z);
  const Poly<R>& hA = f.side == Side::Left ? p.hL : p.hR;
  const Poly<R>& hB = f.side == Side::Left ? p.hR : p.hL;
  const Mat<R> a =
      block_diag<R>(Mat<R>(R(2) * hA(z) + I), Mat<R>(R(-2) * hB(z) + I)).dense();
  const Mat<R> nb =
      block_diag<R>(n_transform<R>(hA)(z), n_transform<R>(Poly<R>(-hB))(z)).dense();
  const Mat<R> t1 = z * d2Y;
  Mat<R> t2, t3, t4;
  if (f.side == Side::Left) {
    t2 = dY * a;
    t3 = Y * nb;
    t4 = NM * Y;
  } else {
    t2 = a * dY;
    t3 = nb * Y;
    t4 = Y * NM;
  }
  return {max_abs<R>(Mat<R>(t1 + t2 + t3 - t4)),
          poly_scale<R>({max_abs<R>(t1), max_abs<R>(t2), max_abs<R>(t3), max_abs<R>(t4)})};
}

template <class R>
PolynomialResidual<R> first_order_polynomial_residual(const BiorthSystem<R>& sys,
                                                    const PearsonData<R>& pearson, int n) {
  const auto M = structure_matrix_explicit<R>(sys, pearson, n).Mtilde;
  const int N = sys.dim;
  const Poly<R>& P = sys.PL[n];
  const Poly<R> prev = sys.C[n - 1] * sys.PL[n - 1];
  const Poly<R> t1 = P.derivative().shifted(1), t2 = P * pearson.hL;
  const Poly<R> t3 = block_of<R>(M, 0, 0, N) * P, t4 = block_of<R>(M, 0, 1, N) * prev;
  return {t1 + t2 - t3 + t4,
          poly_scale<R>({t1.max_coeff(), t2.max_coeff(), t3.max_coeff(), t4.max_coeff()})};
}

template <class R>
PolynomialResidual<R> second_order_polynomial_residual(const BiorthSystem<R>& sys,
                                                     const PearsonData<R>& pearson, int n) {
  const auto M = structure_matrix_explicit<R>(sys, pearson, n).Mtilde;
  const int N = sys.dim;
  const Poly<R>& P = sys.PL[n];
  const Poly<R>& h = pearson.hL;
  const Poly<R> a = R(2) * h + Poly<R>::identity(N);
  const Poly<R> zNh = h.derivative().shifted(1) + h * h;
  const Poly<R> zNM = M.derivative().shifted(1) + M * M;
  const Poly<R> prev = sys.C[n - 1] * sys.PL[n - 1];
  const Poly<R> d1 = P.derivative();
  const Poly<R> t1 = d1.derivative().shifted(2), t2 = (d1 * a).shifted(1), t3 = P * zNh;
  const Poly<R> t4 = block_of<R>(zNM, 0, 0, N) * P, t5 = block_of<R>(zNM, 0, 1, N) * prev;
  return {t1 + t2 + t3 - t4 + t5, poly_scale<R>({t1.max_coeff(), t2.max_coeff(), t3.max_coeff(),
                                                 t4.max_coeff(), t5.max_coeff()})};
}

template <class R>
EigenReport<R> eigenvalue_check(const BiorthSystem<R>& sys, const PearsonData<R>& pearson, int n,
                                const Mat<R>& alphaL, const Mat<R>& alphaR, R tol) {
  if (pearson.hL.trimmed().degree() != 1 || pearson.hR.trimmed().degree() != 1)
    throw Error(ErrorKind::InvalidModel, "eigenvalue problem needs degree-one hᴸ and hᴿ");
  for (const Mat<R>& lead : {pearson.hL.coeff(1), pearson.hR.coeff(1)})
    for (const auto& e : eigenvalues<R>(lead))
      if (!(e.real() < 0))
        throw Error(ErrorKind::InvalidModel, "leading Pearson coefficient not negative definite");
  const int N = sys.dim;
  const Poly<R> I = Poly<R>::identity(N);
  const Poly<R> aL = R(2) * pearson.hL + I, aR = R(2) * pearson.hR + I;
  const Poly<R>& PL = sys.PL[n];
  const Poly<R>& PR = sys.PR[n];
  const Poly<R> LL = PL.derivative().derivative().shifted(1) + PL.derivative() * aL + PL * alphaL;
  const Poly<R> LR = PR.derivative().derivative().shifted(1) + aR * PR.derivative() + alphaR * PR;
  EigenReport<R> r;
  r.lambdaL = LL.coeff(n);
  r.lambdaR = LR.coeff(n);
  r.left = {(LL - r.lambdaL * PL).max_coeff(), LL.max_coeff()};
  r.right = {(LR - PR * r.lambdaR).max_coeff(), LR.max_coeff()};
  const Mat<R> a = r.lambdaL * sys.Cinv[n], b = sys.Cinv[n] * r.lambdaR;
  r.intertwining = {max_abs<R>(Mat<R>(a - b)), std::max(max_abs<R>(a), max_abs<R>(b))};
  if (!(r.left.relative() <= tol) || !(r.right.relative() <= tol))
    throw Error(ErrorKind::NotEigenfunction,
                "Pₙ is not an eigenfunction at n = " + std::to_string(n));
  return r;
}

template <class R>
Mat<R> hidden_constraint_residual(const WeightModel<R>& model, const Mat<R>& alphaL,
                                  const Mat<R>& alphaR, R x) {
  const auto& p = model.pearson();
  const Cx<R> z(x, 0);
  const Mat<R> W = model.eval(x);
  return (alphaL - n_transform<R>(p.hL)(z)) * W - W * (alphaR - n_transform<R>(p.hR)(z));
}

template <class R>
Residual<R> adjointness_check(const WeightModel<R>& model, const MomentTable<R>& table, int d1,
                              int d2) {
  const auto& p = model.pearson();
  const int N = model.dim();
  const Poly<R> I = Poly<R>::identity(N);
  const Poly<R> aL = R(2) * p.hL + I, aR = R(2) * p.hR + I;
  const auto bL = n_transform<R>(p.hL), bR = n_transform<R>(p.hR);

  // G = ∫ (resᴸ·W − W·resᴿ)/x, only when the integrand does not vanish identically.
  Mat<R> G = zeros<R>(N);
  {
    R g = 0, w = 0;
    for (R x : {R(0.3), R(1), R(3)}) {
      const Mat<R> W = model.eval(x);
      g = std::max(g, max_abs<R>(Mat<R>(bL.residue * W - W * bR.residue)));
      w = std::max(w, max_abs<R>(W) * (max_abs<R>(bL.residue) + max_abs<R>(bR.residue)));
    }
    if (g > R(1e3) * std::numeric_limits<R>::epsilon() * w) {
      if (model.origin_exponent() <= 0)
        throw Error(ErrorKind::QuadratureDivergence, "singular adjointness term not integrable");
      RayIntegrand<R> f = [&](R x, std::vector<Mat<R>>& out) {
        const Mat<R> W = model.eval(x);
        out[0] = (bL.residue * W - W * bR.residue) / x;
      };
      QuadConfig<R> cfg;
      cfg.origin_exponent = model.origin_exponent() - 1;
      G = integrate_ray<R>(f, 1, N, cfg).value[0];
    }
  }

  auto shifted_moment_left = [&](const Poly<R>& P) {  // Σ_{i≥1} Pᵢ W_{i−1}
    Mat<R> acc = zeros<R>(N);
    for (int i = 1; i < P.size(); ++i) acc += P[i] * table[i - 1];
    return acc;
  };
  auto shifted_moment_right = [&](const Poly<R>& Q) {  // Σ_{j≥1} W_{j−1} Q_j
    Mat<R> acc = zeros<R>(N);
    for (int j = 1; j < Q.size(); ++j) acc += table[j - 1] * Q[j];
    return acc;
  };

  Residual<R> out;
  for (int i = 0; i <= d1; ++i)
    for (int j = 0; j <= d2; ++j)
      for (int a = 0; a < N * N; ++a)
        for (int b = 0; b < N * N; ++b) {
          Mat<R> Ea = zeros<R>(N), Eb = zeros<R>(N);
          Ea(a / N, a % N) = 1;
          Eb(b / N, b % N) = 1;
          const Poly<R> P = Poly<R>::monomial(Ea, i), Q = Poly<R>::monomial(Eb, j);
          const Poly<R> d2P = P.derivative().derivative(), d2Q = Q.derivative().derivative();
          // P·res/z = ((P − P(0))/z)·res + P(0)·res/z
          const Poly<R> lP = d2P.shifted(1) + P.derivative() * aL + P * bL.regular +
                             drop_constant<R>(P) * bL.residue;
          const Poly<R> rQ = d2Q.shifted(1) + aR * Q.derivative() + bR.regular * Q +
                             bR.residue * drop_constant<R>(Q);
          const Mat<R> SL = P.coeff(0) * bL.residue, SR = bR.residue * Q.coeff(0);
          const Mat<R> lhs = sesquilinear<R>(lP, Q, table) + SL * shifted_moment_right(Q);
          const Mat<R> rhs = sesquilinear<R>(P, rQ, table) + shifted_moment_left(P) * SR;
          const Mat<R> sing = P.coeff(0) * G * Q.coeff(0);
          out.raw = std::max(out.raw, max_abs<R>(Mat<R>(lhs - rhs + sing)));
          out.scale = std::max(out.scale, std::max(max_abs<R>(lhs), max_abs<R>(rhs)));
        }
  return out;
}

template <class R>
Residual<R> zlr_residual(const SecondKindEvaluator<R>& ev, int n, Cx<R> z) {
  const Mat<R> ZL = constant_jump_matrix<R>(ev, n, Side::Left, z).dense();
  const Mat<R> ZR = constant_jump_matrix<R>(ev, n, Side::Right, z).dense();
  const Mat<R> S = s_matrix<R>(ev.system().dim);
  const Mat<R> lhs = S * ZL.inverse() * (-S);
  return {max_abs<R>(Mat<R>(lhs - ZR)), std::max(max_abs<R>(lhs), max_abs<R>(ZR))};
}

template <class R>
Residual<R> right_structure_relation(const SecondKindEvaluator<R>& ev, int n, Cx<R> z, R step) {
  const Mat<R> ML = structure_matrix_numeric<R>(ev, n, Side::Left, z, step).dense();
  const Mat<R> MR = structure_matrix_numeric<R>(ev, n, Side::Right, z, step).dense();
  const Mat<R> S = s_matrix<R>(ev.system().dim);
  const Mat<R> rhs = -(S * ML * (-S));
  return {max_abs<R>(Mat<R>(MR - rhs)), std::max(max_abs<R>(MR), max_abs<R>(rhs))};
}

template <class R>
PolynomialResidual<R> laguerre_p_residual(const BiorthSystem<R>& sys, int n, R alpha) {
  const Poly<R>& P = sys.PL[n];
  const Poly<R> d1 = P.derivative();
  const Poly<R> t1 = d1.derivative().shifted(1), t2 = d1.shifted(1), t3 = Cx<R>(alpha + 1) * d1,
                t4 = Cx<R>(n) * P;
  return {t1 - t2 + t3 + t4,
          poly_scale<R>({t1.max_coeff(), t2.max_coeff(), t3.max_coeff(), t4.max_coeff()})};
}

template <class R>
Residual<R> laguerre_q_residual(const SecondKindValues<R>& q, int n, R alpha, Cx<R> z) {
  const Mat<R> t1 = z * q.L(n, 2), t2 = (z - alpha + R(1)) * q.L(n, 1), t3 = R(n + 1) * q.L(n);
  return {max_abs<R>(Mat<R>(t1 + t2 + t3)),
          poly_scale<R>({max_abs<R>(t1), max_abs<R>(t2), max_abs<R>(t3)})};
}

#define MATBIORTH_INSTANTIATE(R)                                                                \
  template std::vector<Cx<R>> z_ring<R>();                                                     \
  template BlockMatrix2x2<R> assemble_Y<R>(const BiorthSystem<R>&, const SecondKindValues<R>&, \
                                           int, Side, Cx<R>, int);                             \
  template BlockMatrix2x2<R> assemble_Y<R>(const BiorthSystem<R>&,                             \
                                           const SecondKindEvaluator<R>&, int, Side, Cx<R>);   \
  template FundamentalFrame<R> make_frame<R>(const BiorthSystem<R>&,                           \
                                             const SecondKindValues<R>&, int, Side, Cx<R>);    \
  template R det_residual<R>(const FundamentalFrame<R>&);                                      \
  template R normalization_residual<R>(const FundamentalFrame<R>&);                            \
  template std::array<Residual<R>, 3> corollary_identities<R>(                                 \
      const BiorthSystem<R>&, const SecondKindValues<R>&, int, Cx<R>, const Mat<R>*);          \
  template Residual<R> inverse_consistency<R>(const BiorthSystem<R>&,                          \
                                              const SecondKindValues<R>&, int, Cx<R>);         \
  template MatrixPolynomial<R> transfer_polynomial<R>(const BiorthSystem<R>&, int, Side);      \
  template BlockMatrix2x2<R> transfer_matrix<R>(const BiorthSystem<R>&, int, Side, Cx<R>);     \
  template Residual<R> transfer_residual<R>(const BiorthSystem<R>&, const SecondKindValues<R>&, \
                                            int, Side, Cx<R>);                                 \
  template StructureMatrix<R> structure_matrix_explicit<R>(                                    \
      const BiorthSystem<R>&, const PearsonData<R>&, int, Side, StructureForm);                \
  template BlockMatrix2x2<R> constant_jump_matrix<R>(const SecondKindEvaluator<R>&, int, Side, \
                                                     Cx<R>);                                   \
  template BlockMatrix2x2<R> structure_matrix_numeric<R>(const SecondKindEvaluator<R>&, int,   \
                                                         Side, Cx<R>, R);                      \
  template BlockMatrix2x2<R> laurent_residue<R>(const SecondKindEvaluator<R>&, int, Side, R,   \
                                                int, R);                                       \
  template PolynomialResidual<R> zero_curvature_residual<R>(const BiorthSystem<R>&,              \
                                                          const PearsonData<R>&, int, Side);   \
  template struct NTransform<R>;                                                               \
  template NTransform<R> n_transform<R>(const MatrixPolynomial<R>&);                           \
  template Mat<R> n_transform<R>(const std::function<Mat<R>(Cx<R>)>&, Cx<R>, R);               \
  template Residual<R> first_order_ode_residual<R>(const FundamentalFrame<R>&,                 \
                                                   const PearsonData<R>&,                      \
                                                   const StructureMatrix<R>&);                 \
  template Residual<R> second_order_ode_residual<R>(const FundamentalFrame<R>&,                \
                                                    const PearsonData<R>&,                     \
                                                    const StructureMatrix<R>&);                \
  template PolynomialResidual<R> first_order_polynomial_residual<R>(                             \
      const BiorthSystem<R>&, const PearsonData<R>&, int);                                     \
  template PolynomialResidual<R> second_order_polynomial_residual<R>(                            \
      const BiorthSystem<R>&, const PearsonData<R>&, int);                                     \
  template EigenReport<R> eigenvalue_check<R>(const BiorthSystem<R>&, const PearsonData<R>&,   \
                                              int, const Mat<R>&, const Mat<R>&, R);           \
  template Mat<R> hidden_constraint_residual<R>(const WeightModel<R>&, const Mat<R>&,          \
                                                const Mat<R>&, R);                             \
  template Residual<R> adjointness_check<R>(const WeightModel<R>&, const MomentTable<R>&, int, \
                                            int);                                              \
  template Residual<R> zlr_residual<R>(const SecondKindEvaluator<R>&, int, Cx<R>);             \
  template Residual<R> right_structure_relation<R>(const SecondKindEvaluator<R>&, int, Cx<R>,  \
                                                   R);                                         \
  template PolynomialResidual<R> laguerre_p_residual<R>(const BiorthSystem<R>&, int, R);         \
  template Residual<R> laguerre_q_residual<R>(const SecondKindValues<R>&, int, R, Cx<R>);

MATBIORTH_INSTANTIATE(double)
MATBIORTH_INSTANTIATE(long double)

}  // namespace matbiorth
