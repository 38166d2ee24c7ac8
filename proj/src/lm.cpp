#include "rcpinn/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rcpinn/rng.hpp"

namespace rcpinn {

namespace {

// residuals and Jacobian of the normalized model
//   y(tau) = g0 + sum_i g_i exp(-kappa_i tau),  g = exp(-p_r), kappa = exp(-p_r - p_c)
// w.r.t. p = (p_r0, p_r1, p_c1, ..., p_rn, p_cn)
struct Prob {
  std::vector<double> t, y;  // normalized
  int n = 0;
  int dim() const { return 1 + 2 * n; }

  double cost(std::span<const double> p, std::vector<double>* res = nullptr,
              std::vector<double>* jac = nullptr) const {
    const int k = dim();
    const double g0 = std::exp(-p[0]);
    double c = 0.0;
    if (res) res->assign(t.size(), 0.0);
    if (jac) jac->assign(t.size() * static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < t.size(); ++j) {
      double pred = g0;
      if (jac) (*jac)[j * static_cast<std::size_t>(k)] = -g0;
      for (int i = 0; i < n; ++i) {
        const double pr = p[static_cast<std::size_t>(1 + 2 * i)];
        const double pc = p[static_cast<std::size_t>(2 + 2 * i)];
        const double g = std::exp(-pr);
        const double kap = std::exp(-pr - pc);
        const double ex = std::exp(-kap * t[j]);
        pred += g * ex;
        if (jac) {
          const double kt = kap * t[j];
          (*jac)[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(1 + 2 * i)] =
              g * ex * (kt - 1.0);
          (*jac)[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(2 + 2 * i)] =
              g * ex * kt;
        }
      }
      const double r = pred - y[j];
      if (res) (*res)[j] = r;
      c += r * r;
    }
    return c;
  }
};

// Cholesky solve of (A + lambda diag(A)) x = b; returns false when a pivot
// collapses (rank deficiency at this damping).
bool solve_damped(std::vector<double> A, std::vector<double> b, int k, double lambda,
                  std::vector<double>& x) {
  for (int i = 0; i < k; ++i) A[static_cast<std::size_t>(i * k + i)] *= 1.0 + lambda;
  // in-place LL^T
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[static_cast<std::size_t>(i * k + j)];
      for (int r = 0; r < j; ++r)
        s -= A[static_cast<std::size_t>(i * k + r)] * A[static_cast<std::size_t>(j * k + r)];
      if (i == j) {
        if (!(s > 0.0)) return false;
        A[static_cast<std::size_t>(i * k + i)] = std::sqrt(s);
      } else {
        A[static_cast<std::size_t>(i * k + j)] = s / A[static_cast<std::size_t>(j * k + j)];
      }
    }
  }
  for (int i = 0; i < k; ++i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int r = 0; r < i; ++r) s -= A[static_cast<std::size_t>(i * k + r)] * b[static_cast<std::size_t>(r)];
    b[static_cast<std::size_t>(i)] = s / A[static_cast<std::size_t>(i * k + i)];
  }
  x.assign(static_cast<std::size_t>(k), 0.0);
  for (int i = k - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int r = i + 1; r < k; ++r)
      s -= A[static_cast<std::size_t>(r * k + i)] * x[static_cast<std::size_t>(r)];
    x[static_cast<std::size_t>(i)] = s / A[static_cast<std::size_t>(i * k + i)];
  }
  return true;
}

struct RunOut {
  std::vector<double> p;
  double cost = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool ill_conditioned = false;
};

RunOut lm_run(const Prob& prob, std::vector<double> p, const LmConfig& cfg) {
  const int k = prob.dim();
  std::vector<double> res, jac, A(static_cast<std::size_t>(k * k)), g(static_cast<std::size_t>(k)), dp;
  double lambda = cfg.lambda0;
  double cost = prob.cost(p, &res, &jac);
  RunOut out;
  for (int it = 0; it < cfg.max_iters; ++it) {
    out.iters = it + 1;
    // normal equations
    std::fill(A.begin(), A.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 0; j < prob.t.size(); ++j) {
      for (int a = 0; a < k; ++a) {
        const double ja = jac[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(a)];
        g[static_cast<std::size_t>(a)] += ja * res[j];
        for (int b = a; b < k; ++b)
          A[static_cast<std::size_t>(a * k + b)] +=
              ja * jac[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(b)];
      }
    }
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < a; ++b)
        A[static_cast<std::size_t>(a * k + b)] = A[static_cast<std::size_t>(b * k + a)];

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      std::vector<double> rhs(g.begin(), g.end());
      for (auto& v : rhs) v = -v;
      if (!solve_damped(A, rhs, k, lambda, dp)) {
        lambda *= 4.0;
        continue;
      }
      std::vector<double> pn(p);
      bool sane = true;
      for (int a = 0; a < k; ++a) {
        pn[static_cast<std::size_t>(a)] += dp[static_cast<std::size_t>(a)];
        if (std::abs(pn[static_cast<std::size_t>(a)]) > 35.0) sane = false;  // keep exp() in range
      }
      const double cn = sane ? prob.cost(pn) : std::numeric_limits<double>::infinity();
      if (cn < cost) {
        const double drop = (cost - cn) / std::max(cost, 1e-300);
        p = std::move(pn);
        cost = prob.cost(p, &res, &jac);
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (drop < cfg.tol) {
          out.p = p;
          out.cost = cost;
          return out;
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e14) {
          out.p = p;
          out.cost = cost;
          return out;
        }
      }
    }
    if (!accepted) break;
  }
  out.p = p;
  out.cost = cost;
  return out;
}

}  // namespace

LmResult fit_static(const Dataset& ds, int n_branches, const LmConfig& cfg) {
  if (ds.is_temperature()) throw std::invalid_argument("fit_static: temperature dataset");
  if (ds.samples.empty()) throw std::invalid_argument("fit_static: empty dataset");
  if (n_branches < 0) throw std::invalid_argument("fit_static: n_branches must be >= 0");

  auto [nds, norm] = normalize(ds);
  Prob prob;
  prob.n = n_branches;
  for (const auto& s : nds.samples) {
    prob.t.push_back(s.t);
    prob.y.push_back(s.current);
  }

  const int k = prob.dim();
  RunOut best;
  double best_pnorm = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.multistart; ++s) {
    std::vector<double> p0(static_cast<std::size_t>(k), 0.0);
    if (s > 0) {
      Xoshiro256 rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(s)));
      for (auto& v : p0) v = rng.uniform(std::log(cfg.box_lo), std::log(cfg.box_hi));
    }
    RunOut r = lm_run(prob, std::move(p0), cfg);
    double pn = 0.0;
    for (double v : r.p) pn += v * v;
    if (r.cost < best.cost || (r.cost == best.cost && pn < best_pnorm)) {
      best = std::move(r);
      best_pnorm = pn;
    }
  }

  // conditioning flag: undamped normal equations lose a pivot at the optimum
  {
    std::vector<double> res, jac;
    prob.cost(best.p, &res, &jac);
    std::vector<double> A(static_cast<std::size_t>(k * k), 0.0);
    for (std::size_t j = 0; j < prob.t.size(); ++j)
      for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b)
          A[static_cast<std::size_t>(a * k + b)] +=
              jac[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(a)] *
              jac[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(b)];
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < a; ++b)
        A[static_cast<std::size_t>(a * k + b)] = A[static_cast<std::size_t>(b * k + a)];
    double max_diag = 0.0;
    for (int a = 0; a < k; ++a)
      max_diag = std::max(max_diag, A[static_cast<std::size_t>(a * k + a)]);
    std::vector<double> x;
    std::vector<double> Areg(A);
    for (int a = 0; a < k; ++a)
      Areg[static_cast<std::size_t>(a * k + a)] += 1e-12 * std::max(max_diag, 1e-300);
    best.ill_conditioned = !solve_damped(Areg, std::vector<double>(static_cast<std::size_t>(k), 0.0),
                                         k, 0.0, x);
    if (!best.ill_conditioned) {
      // cheap spectral bound: flag when the diagonal spread alone exceeds ~1e12
      double min_diag = std::numeric_limits<double>::infinity();
      for (int a = 0; a < k; ++a)
        min_diag = std::min(min_diag, A[static_cast<std::size_t>(a * k + a)]);
      if (!(min_diag > max_diag * 1e-12)) best.ill_conditioned = true;
    }
  }

  // denormalize: R = r_ref * exp(p_r), C = c_ref * exp(p_c)
  const double u = ds.static_spec ? ds.static_spec->u_dc : 1.0;
  const double rr = u / norm.current_scale;
  const double cr = norm.current_scale * norm.t_scale / u;
  LmResult out;
  out.spec.u_dc = u;
  out.spec.r0 = rr * std::exp(best.p[0]);
  for (int i = 0; i < n_branches; ++i)
    out.spec.branches.push_back({rr * std::exp(best.p[static_cast<std::size_t>(1 + 2 * i)]),
                                 cr * std::exp(best.p[static_cast<std::size_t>(2 + 2 * i)])});
  std::sort(out.spec.branches.begin(), out.spec.branches.end(),
            [](const RcBranch& a, const RcBranch& b) { return a.tau() < b.tau(); });
  out.cost = best.cost;
  out.iterations = best.iters;
  out.ill_conditioned = best.ill_conditioned;
  return out;
}

ArrheniusLaw fit_arrhenius(std::span<const std::pair<double, double>> temp_resistance) {
  if (temp_resistance.size() < 2)
    throw std::invalid_argument("fit_arrhenius: need at least two samples");
  double x0 = 0.0;
  bool distinct = false;
  for (std::size_t i = 0; i < temp_resistance.size(); ++i) {
    const auto& [T, R] = temp_resistance[i];
    if (!(T > 0.0)) throw std::invalid_argument("fit_arrhenius: temperature must be > 0");
    if (!(R > 0.0)) throw std::invalid_argument("fit_arrhenius: resistance must be > 0");
    if (i == 0) x0 = 1.0 / T;
    else if (1.0 / T != x0) distinct = true;
  }
  if (!distinct) throw std::invalid_argument("fit_arrhenius: need two distinct temperatures");

  // least squares of ln R = ln a + (w/kB) * (1/T)
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(temp_resistance.size());
  for (const auto& [T, R] : temp_resistance) {
    const double x = 1.0 / T;
    const double y = std::log(R);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  ArrheniusLaw law;
  law.a = std::exp(intercept);
  law.w = slope * kBoltzmannEv;
  return law;
}

}  // namespace rcpinn
