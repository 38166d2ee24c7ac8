#include "rcpinn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rcpinn/rng.hpp"

namespace rcpinn {

Collocation collocation_static(long count) {
  if (count < 1) throw std::invalid_argument("collocation count must be >= 1");
  std::vector<double> t(static_cast<std::size_t>(count));
  if (count == 1) {
    t[0] = 0.0;
  } else {
    for (long i = 0; i < count; ++i)
      t[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(count - 1);
  }
  Collocation c;
  c.by_group.push_back(std::move(t));
  return c;
}

Collocation collocation_temperature(long count, int n_temps, std::uint64_t seed) {
  if (count < 1 || n_temps < 1) throw std::invalid_argument("bad collocation request");
  const long per = std::max<long>(2, (count + n_temps - 1) / n_temps);
  std::vector<double> grid(static_cast<std::size_t>(per));
  for (long i = 0; i < per; ++i)
    grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(per - 1);

  const long total = per * n_temps;
  long to_drop = total - count;
  std::vector<char> dropped(static_cast<std::size_t>(total), 0);
  if (to_drop > 0) {
    // seeded shuffle of all indices; drop from the front, but never a
    // group's last remaining point
    std::vector<long> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), 0);
    Xoshiro256 rng(substream_seed(seed, 1));
    for (long i = total - 1; i > 0; --i) {
      const long j = static_cast<long>(rng.next() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::vector<long> remaining(static_cast<std::size_t>(n_temps), per);
    for (long k = 0; k < total && to_drop > 0; ++k) {
      const long i = idx[static_cast<std::size_t>(k)];
      const long q = i / per;
      if (remaining[static_cast<std::size_t>(q)] <= 1) continue;
      dropped[static_cast<std::size_t>(i)] = 1;
      --remaining[static_cast<std::size_t>(q)];
      --to_drop;
    }
  }

  Collocation c;
  c.by_group.resize(static_cast<std::size_t>(n_temps));
  for (int q = 0; q < n_temps; ++q)
    for (long i = 0; i < per; ++i)
      if (!dropped[static_cast<std::size_t>(q * per + i)])
        c.by_group[static_cast<std::size_t>(q)].push_back(grid[static_cast<std::size_t>(i)]);
  return c;
}

TrainingData prepare_training_data(const Dataset& raw) {
  if (raw.samples.empty()) throw std::invalid_argument("empty dataset");
  auto [nds, norm] = normalize(raw);
  TrainingData td;
  td.norm = norm;
  td.total = nds.samples.size();
  td.temperature = raw.is_temperature();
  if (!td.temperature) {
    td.t_by_group.resize(1);
    td.y_by_group.resize(1);
    for (const auto& s : nds.samples) {
      td.t_by_group[0].push_back(s.t);
      td.y_by_group[0].push_back(s.current);
    }
    return td;
  }
  td.temps_phys = raw.temperatures;
  const int nq = static_cast<int>(raw.temperatures.size());
  td.t_by_group.resize(static_cast<std::size_t>(nq));
  td.y_by_group.resize(static_cast<std::size_t>(nq));
  td.temps_norm.resize(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q)
    td.temps_norm[static_cast<std::size_t>(q)] = norm.norm_temp(raw.temperatures[static_cast<std::size_t>(q)]);
  for (const auto& s : nds.samples) {
    if (!s.temperature) throw std::invalid_argument("temperature dataset with static sample");
    // group by exact match against the recorded sweep (generation reuses the
    // same normalized value per temperature)
    int q = -1;
    for (int k = 0; k < nq; ++k)
      if (*s.temperature == td.temps_norm[static_cast<std::size_t>(k)]) {
        q = k;
        break;
      }
    if (q < 0) throw std::invalid_argument("sample temperature not in the sweep list");
    td.t_by_group[static_cast<std::size_t>(q)].push_back(s.t);
    td.y_by_group[static_cast<std::size_t>(q)].push_back(s.current);
  }
  return td;
}

double data_loss_numeric(std::span<const double> predicted_total,
                         std::span<const double> targets) {
  if (predicted_total.size() != targets.size() || targets.empty())
    throw std::invalid_argument("data_loss: size mismatch or empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = predicted_total[i] - targets[i];
    sum += e * e;
  }
  return sum / static_cast<double>(targets.size());
}

double physics_loss_numeric(const SurrogateEval& eval, int m, const kern::StaticCoeffs& co,
                            std::span<const double> taus) {
  double sum = 0.0;
  std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m));
  for (double tau : taus) {
    eval(tau, u.data(), v.data());
    if (co.n == 0) {
      sum += v[0] * v[0];
    } else {
      double r = v[0] + co.kappa[0] * (u[0] - co.g0);
      sum += r * r;
      for (int i = 1; i < co.n; ++i) {
        r = v[static_cast<std::size_t>(i)] + co.kappa[i] * u[static_cast<std::size_t>(i)];
        sum += r * r;
      }
    }
  }
  return sum / (static_cast<double>(taus.size()) * m);
}

double ic_loss_numeric(const SurrogateEval& eval, int m, const kern::StaticCoeffs& co) {
  std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(m));
  eval(0.0, u.data(), v.data());
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double tgt = k == 0 ? (co.n == 0 ? co.g0 : co.g0 + co.g[0]) : co.g[k];
    const double e = u[static_cast<std::size_t>(k)] - tgt;
    sum += e * e;
  }
  return sum;
}

// --- tape builders ------------------------------------------------------------

TapeLoss build_loss(Tape& tape, const PinnStaticModel& model, const TrainingData& td,
                    const Collocation& coll, const LossWeights& w) {
  if (td.temperature) throw std::invalid_argument("static model with temperature data");
  const MlpSpec& spec = model.net.spec;
  const int m = model.output_count();
  const int n = model.n_branches;

  auto net_leaves = make_leaves(tape, model.net.flat);
  auto raw_r = make_leaves(tape, model.raw_r);
  auto raw_c = make_leaves(tape, model.raw_c);

  const Var g0 = exp(-raw_r[0]);
  std::vector<Var> g, kappa;
  for (int i = 1; i <= n; ++i) {
    g.push_back(exp(-raw_r[static_cast<std::size_t>(i)]));
    kappa.push_back(exp(-raw_r[static_cast<std::size_t>(i)] - raw_c[static_cast<std::size_t>(i - 1)]));
  }

  // data: mean squared mismatch of the summed branch outputs
  Var dsum = tape.constant(0.0);
  const auto& ts = td.t_by_group[0];
  const auto& ys = td.y_by_group[0];
  for (std::size_t j = 0; j < ts.size(); ++j) {
    const Var x = tape.constant(ts[j]);
    const auto u = mlp_forward<Var>(spec, net_leaves, std::span<const Var>(&x, 1));
    Var e = u[0];
    for (int k = 1; k < m; ++k) e = e + u[static_cast<std::size_t>(k)];
    e = e - ys[j];
    dsum = dsum + e * e;
  }
  const Var loss_data = dsum / static_cast<double>(ts.size());

  // physics: residuals at collocation points, du/dtau from the dual tangent
  const Var one = tape.constant(1.0);
  Var psum = tape.constant(0.0);
  for (double tau : coll.by_group[0]) {
    const Dual<Var> x{tape.constant(tau), one};
    const auto u = mlp_forward<Dual<Var>>(spec, net_leaves, std::span<const Dual<Var>>(&x, 1));
    if (n == 0) {
      psum = psum + u[0].dot * u[0].dot;
    } else {
      Var r = u[0].dot + kappa[0] * (u[0].val - g0);
      psum = psum + r * r;
      for (int i = 1; i < n; ++i) {
        r = u[static_cast<std::size_t>(i)].dot + kappa[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)].val;
        psum = psum + r * r;
      }
    }
  }
  const Var loss_phys = psum / static_cast<double>(coll.by_group[0].size() * static_cast<std::size_t>(m));

  // initial condition at tau = 0
  const Var x0 = tape.constant(0.0);
  const auto u0 = mlp_forward<Var>(spec, net_leaves, std::span<const Var>(&x0, 1));
  Var isum = tape.constant(0.0);
  for (int k = 0; k < m; ++k) {
    const Var tgt = k == 0 ? (n == 0 ? g0 : g0 + g[0]) : g[static_cast<std::size_t>(k)];
    const Var e = u0[static_cast<std::size_t>(k)] - tgt;
    isum = isum + e * e;
  }
  const Var loss_ic = isum;

  TapeLoss out;
  out.data = loss_data;
  out.phys = loss_phys;
  out.ic = loss_ic;
  out.total = w.data_w * loss_data + w.physics_w * loss_phys + w.ic_w * loss_ic;
  out.trainables = std::move(net_leaves);
  out.trainables.insert(out.trainables.end(), raw_r.begin(), raw_r.end());
  out.trainables.insert(out.trainables.end(), raw_c.begin(), raw_c.end());
  return out;
}

TapeLoss build_loss(Tape& tape, const PinnTempModel& model, const TrainingData& td,
                    const Collocation& coll, const LossWeights& w) {
  if (!td.temperature) throw std::invalid_argument("temperature model with static data");
  const MlpSpec& mspec = model.main.spec;
  const MlpSpec& sspec = model.sub.spec;
  const int m = model.output_count();
  const int n = model.n_branches;
  const int nq = static_cast<int>(td.temps_norm.size());

  auto main_leaves = make_leaves(tape, model.main.flat);
  auto sub_leaves = make_leaves(tape, model.sub.flat);
  auto raw_scale = make_leaves(tape, model.raw_scale);
  auto raw_c = make_leaves(tape, model.raw_c);

  std::vector<Var> lam, cap;
  for (int i = 0; i < n; ++i) {
    lam.push_back(exp(raw_scale[static_cast<std::size_t>(i)]));
    cap.push_back(exp(raw_c[static_cast<std::size_t>(i)]));
  }

  // per-temperature representative resistance, feature and coefficients
  std::vector<Var> xi(static_cast<std::size_t>(nq)), g0(static_cast<std::size_t>(nq));
  std::vector<std::vector<Var>> g(static_cast<std::size_t>(nq)), kap(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    const Var tn = tape.constant(td.temps_norm[static_cast<std::size_t>(q)]);
    const Var zeta = mlp_forward<Var>(sspec, sub_leaves, std::span<const Var>(&tn, 1))[0];
    const Var r0q = exp(zeta);
    xi[static_cast<std::size_t>(q)] = r0q * (1.0 / model.feature_scale);
    g0[static_cast<std::size_t>(q)] = 1.0 / r0q;
    for (int i = 0; i < n; ++i) {
      const Var gi = g0[static_cast<std::size_t>(q)] / lam[static_cast<std::size_t>(i)];
      g[static_cast<std::size_t>(q)].push_back(gi);
      kap[static_cast<std::size_t>(q)].push_back(gi / cap[static_cast<std::size_t>(i)]);
    }
  }

  Var dsum = tape.constant(0.0);
  for (int q = 0; q < nq; ++q) {
    const auto& ts = td.t_by_group[static_cast<std::size_t>(q)];
    const auto& ys = td.y_by_group[static_cast<std::size_t>(q)];
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const Var x[2] = {tape.constant(ts[j]), xi[static_cast<std::size_t>(q)]};
      const auto u = mlp_forward<Var>(mspec, main_leaves, std::span<const Var>(x, 2));
      Var e = u[0];
      for (int k = 1; k < m; ++k) e = e + u[static_cast<std::size_t>(k)];
      e = e - ys[j];
      dsum = dsum + e * e;
    }
  }
  const Var loss_data = dsum / static_cast<double>(td.total);

  const Var one = tape.constant(1.0);
  const Var zero = tape.constant(0.0);
  Var psum = tape.constant(0.0);
  for (int q = 0; q < nq; ++q) {
    for (double tau : coll.by_group[static_cast<std::size_t>(q)]) {
      const Dual<Var> x[2] = {{tape.constant(tau), one}, {xi[static_cast<std::size_t>(q)], zero}};
      const auto u = mlp_forward<Dual<Var>>(mspec, main_leaves, std::span<const Dual<Var>>(x, 2));
      Var r = u[0].dot + kap[static_cast<std::size_t>(q)][0] * (u[0].val - g0[static_cast<std::size_t>(q)]);
      psum = psum + r * r;
      for (int i = 1; i < n; ++i) {
        r = u[static_cast<std::size_t>(i)].dot +
            kap[static_cast<std::size_t>(q)][static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)].val;
        psum = psum + r * r;
      }
    }
  }
  const Var loss_phys = psum / static_cast<double>(coll.total() * static_cast<std::size_t>(m));

  Var isum = tape.constant(0.0);
  for (int q = 0; q < nq; ++q) {
    const Var x[2] = {zero, xi[static_cast<std::size_t>(q)]};
    const auto u0 = mlp_forward<Var>(mspec, main_leaves, std::span<const Var>(x, 2));
    for (int k = 0; k < m; ++k) {
      const Var tgt = k == 0 ? g0[static_cast<std::size_t>(q)] + g[static_cast<std::size_t>(q)][0]
                             : g[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
      const Var e = u0[static_cast<std::size_t>(k)] - tgt;
      isum = isum + e * e;
    }
  }
  const Var loss_ic = isum / static_cast<double>(nq);

  TapeLoss out;
  out.data = loss_data;
  out.phys = loss_phys;
  out.ic = loss_ic;
  out.total = w.data_w * loss_data + w.physics_w * loss_phys + w.ic_w * loss_ic;
  out.trainables = std::move(main_leaves);
  out.trainables.insert(out.trainables.end(), sub_leaves.begin(), sub_leaves.end());
  out.trainables.insert(out.trainables.end(), raw_scale.begin(), raw_scale.end());
  out.trainables.insert(out.trainables.end(), raw_c.begin(), raw_c.end());
  return out;
}

}  // namespace rcpinn
