#include "matbiorth/quadrature.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace matbiorth {

int worker_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("MATBIORTH_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

template <class R>
const GaussRule<R>& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule<R>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule<R> rule;
  rule.x.resize(order);
  rule.w.resize(order);
  const R pi = std::numbers::pi_v<R>;
  const R eps = std::numeric_limits<R>::epsilon();
  for (int i = 0; i < (order + 1) / 2; ++i) {
    R z = std::cos(pi * (R(i) + R(0.75)) / (R(order) + R(0.5)));
    R dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      R p0 = 1, p1 = 0;
      for (int j = 1; j <= order; ++j) {
        const R p2 = p1;
        p1 = p0;
        p0 = ((2 * j - 1) * z * p1 - (j - 1) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1);
      const R dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) <= 4 * eps) break;
    }
    // recompute derivative at the converged node
    R p0 = 1, p1 = 0;
    for (int j = 1; j <= order; ++j) {
      const R p2 = p1;
      p1 = p0;
      p0 = ((2 * j - 1) * z * p1 - (j - 1) * p2) / j;
    }
    dp = order * (z * p0 - p1) / (z * z - 1);
    rule.x[i] = -z;
    rule.x[order - 1 - i] = z;
    rule.w[i] = rule.w[order - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

template <class R>
struct PanelSum {
  std::vector<Mat<R>> value;
  std::vector<R> mass;
};

template <class R>
PanelSum<R> gauss_panel(const RayIntegrand<R>& f, int K, int dim, const GaussRule<R>& rule, R a,
                        R b) {
  PanelSum<R> s{std::vector<Mat<R>>(K, zeros<R>(dim)), std::vector<R>(K, R(0))};
  std::vector<Mat<R>> buf(K, zeros<R>(dim));
  const R half = (b - a) / 2, mid = (a + b) / 2;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const R x = mid + half * rule.x[i];
    if (!(x > 0)) continue;
    f(x, buf);
    const R w = half * rule.w[i];
    for (int k = 0; k < K; ++k) {
      s.value[k] += buf[k] * w;
      s.mass[k] += w * max_abs<R>(buf[k]);
    }
  }
  return s;
}

template <class R>
struct PanelOutcome {
  std::vector<Mat<R>> value;
  std::vector<R> err;
  std::vector<R> mass;
  bool diverged = false;
};

template <class R>
void refine(const RayIntegrand<R>& f, int K, int dim, const GaussRule<R>& rule, R a, R b,
            const PanelSum<R>& whole, const std::vector<R>& tol, int depth, int max_depth,
            PanelOutcome<R>& out) {
  const R m = (a + b) / 2;
  PanelSum<R> left = gauss_panel(f, K, dim, rule, a, m);
  PanelSum<R> right = gauss_panel(f, K, dim, rule, m, b);
  bool ok = true;
  std::vector<R> diff(K);
  for (int k = 0; k < K; ++k) {
    diff[k] = max_abs<R>(Mat<R>(left.value[k] + right.value[k] - whole.value[k]));
    if (!(diff[k] <= tol[k])) ok = false;
  }
  if (ok || depth >= max_depth) {
    if (!ok) out.diverged = true;
    for (int k = 0; k < K; ++k) {
      out.value[k] += left.value[k] + right.value[k];
      out.err[k] += diff[k];
      out.mass[k] += left.mass[k] + right.mass[k];
    }
    return;
  }
  std::vector<R> half_tol(K);
  for (int k = 0; k < K; ++k) half_tol[k] = tol[k] / std::sqrt(R(2));
  refine(f, K, dim, rule, a, m, left, half_tol, depth + 1, max_depth, out);
  refine(f, K, dim, rule, m, b, right, half_tol, depth + 1, max_depth, out);
}

}  // namespace

template <class R>
QuadResult<R> integrate_ray(const RayIntegrand<R>& f, int K, int dim, const QuadConfig<R>& cfg) {
  const GaussRule<R>& rule = gauss_legendre<R>(cfg.order);
  const R eps = std::numeric_limits<R>::epsilon();

  // Geometric panels towards the origin: the innermost panel [0, s·2^{−L}] carries at most
  // ~ (2^{−L})^{e+1} of the mass.
  const R e1 = std::max(cfg.origin_exponent + 1, R(1e-3));
  const R target = std::max(cfg.rel_tol * R(1e-2), eps * R(1e-2));
  int levels = static_cast<int>(std::ceil(std::log2(R(1) / target) / e1)) + 2;
  levels = std::min(levels, 1000);

  std::vector<std::pair<R, R>> panels;
  panels.push_back({R(0), std::ldexp(cfg.scale, -levels)});
  for (int k = levels; k >= 1; --k)
    panels.push_back({std::ldexp(cfg.scale, -k), std::ldexp(cfg.scale, -k + 1)});

  auto evaluate = [&](const std::vector<std::pair<R, R>>& batch) {
    std::vector<PanelSum<R>> sums(batch.size());
    const int nb = static_cast<int>(batch.size());
    if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
      for (int i = 0; i < nb; ++i)
        sums[i] = gauss_panel(f, K, dim, rule, batch[i].first, batch[i].second);
    } else {
      for (int i = 0; i < nb; ++i)
        sums[i] = gauss_panel(f, K, dim, rule, batch[i].first, batch[i].second);
    }
    return sums;
  };

  // Outward panels [s·2^k, s·2^{k+1}], added in batches until two consecutive panels are
  // negligible against the accumulated mass.
  std::vector<PanelSum<R>> coarse = evaluate(panels);
  std::vector<R> mass(K, R(0));
  for (const auto& s : coarse)
    for (int k = 0; k < K; ++k) mass[k] += s.mass[k];

  int next = 0;
  int quiet = 0;
  while (quiet < 2) {
    std::vector<std::pair<R, R>> batch;
    for (int j = 0; j < 4; ++j, ++next)
      batch.push_back({std::ldexp(cfg.scale, next), std::ldexp(cfg.scale, next + 1)});
    if (batch.back().second > cfg.max_x)
      throw Error(ErrorKind::QuadratureDivergence, "integrand tail does not decay before max_x");
    std::vector<PanelSum<R>> sums = evaluate(batch);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      bool negligible = true;
      for (int k = 0; k < K; ++k) {
        mass[k] += sums[j].mass[k];
        if (sums[j].mass[k] > target * mass[k]) negligible = false;
      }
      quiet = negligible ? quiet + 1 : 0;
      panels.push_back(batch[j]);
      coarse.push_back(std::move(sums[j]));
      if (quiet >= 2) break;
    }
  }

  const int P = static_cast<int>(panels.size());
  std::vector<R> tol(K);
  for (int k = 0; k < K; ++k)
    tol[k] = std::max(R(0.1) * cfg.rel_tol * mass[k] / std::sqrt(R(P)),
                      std::numeric_limits<R>::min());

  std::vector<PanelOutcome<R>> outcomes(P);
  for (auto& o : outcomes) {
    o.value.assign(K, zeros<R>(dim));
    o.err.assign(K, R(0));
    o.mass.assign(K, R(0));
  }
  if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
    for (int i = 0; i < P; ++i)
      refine(f, K, dim, rule, panels[i].first, panels[i].second, coarse[i], tol, 0, cfg.max_depth,
             outcomes[i]);
  } else {
    for (int i = 0; i < P; ++i)
      refine(f, K, dim, rule, panels[i].first, panels[i].second, coarse[i], tol, 0, cfg.max_depth,
             outcomes[i]);
  }

  QuadResult<R> res;
  res.value.assign(K, zeros<R>(dim));
  res.err_est.assign(K, R(0));
  res.abs_mass.assign(K, R(0));
  res.panels = P;
  res.x_max = panels.back().second;
  for (int i = 0; i < P; ++i) {
    if (outcomes[i].diverged)
      throw Error(ErrorKind::QuadratureDivergence, "panel refinement stalled before tolerance");
    for (int k = 0; k < K; ++k) {
      res.value[k] += outcomes[i].value[k];
      res.err_est[k] += outcomes[i].err[k];
      res.abs_mass[k] += outcomes[i].mass[k];
    }
  }
  // Floor for rounding in the summation itself; the refinement deltas alone miss it.
  for (int k = 0; k < K; ++k) res.err_est[k] += 64 * eps * res.abs_mass[k];
  return res;
}

template const GaussRule<double>& gauss_legendre<double>(int);
template const GaussRule<long double>& gauss_legendre<long double>(int);
template QuadResult<double> integrate_ray<double>(const RayIntegrand<double>&, int, int,
                                                  const QuadConfig<double>&);
template QuadResult<long double> integrate_ray<long double>(const RayIntegrand<long double>&, int,
                                                            int, const QuadConfig<long double>&);

}  // namespace matbiorth
