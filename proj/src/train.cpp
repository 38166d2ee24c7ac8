#include "rcpinn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rcpinn/csvio.hpp"
#include "rcpinn/errors.hpp"

namespace rcpinn {

void TrainTrace::save_csv(const std::string& path) const {
  auto os = open_out(path);
  os << "step,loss_data,loss_phys,loss_ic,lr";
  for (const auto& n : param_names) os << "," << n;
  os << "\n";
  for (const auto& r : rows) {
    os << r.step << "," << fmt17(r.loss_data) << "," << fmt17(r.loss_phys) << ","
       << fmt17(r.loss_ic) << "," << fmt17(r.lr);
    for (double p : r.params) os << "," << fmt17(p);
    os << "\n";
  }
}

namespace {

void check_norm_matches(const NormalizationInfo& a, const NormalizationInfo& b) {
  if (a.t_scale != b.t_scale || a.temp_offset != b.temp_offset || a.temp_scale != b.temp_scale ||
      a.current_scale != b.current_scale)
    throw std::invalid_argument("model normalization does not match the dataset");
}

struct Adam {
  std::vector<double> m, v;
  long t = 0;
  AdamConfig cfg;

  explicit Adam(std::size_t n, const AdamConfig& c) : m(n, 0.0), v(n, 0.0), cfg(c) {}

  void step(std::vector<double*>& slots, const std::vector<double>& g, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < slots.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      *slots[i] -= lr * mh / (std::sqrt(vh) + cfg.eps);
    }
  }
};

}  // namespace

// --- fused static evaluation --------------------------------------------------

LossValue eval_loss(const PinnStaticModel& model, const TrainingData& td, const Collocation& coll,
                    const LossWeights& w, const kern::KernelTable& K, std::vector<double>* grad) {
  const int m = model.output_count();
  const int n = model.n_branches;
  const kern::NetDims nd = kern::NetDims::from(model.net.spec);
  const std::size_t net_size = model.net.flat.size();

  kern::StaticCoeffs co;
  co.n = n;
  co.g0 = std::exp(-model.raw_r[0]);
  for (int i = 1; i <= n; ++i) {
    co.g[i - 1] = std::exp(-model.raw_r[static_cast<std::size_t>(i)]);
    co.kappa[i - 1] =
        std::exp(-model.raw_r[static_cast<std::size_t>(i)] - model.raw_c[static_cast<std::size_t>(i - 1)]);
  }

  double* d_net = nullptr;
  if (grad) {
    grad->assign(net_size + model.raw_r.size() + model.raw_c.size(), 0.0);
    d_net = grad->data();
  }
  double d_g0 = 0.0, d_g[kern::kMaxOut] = {}, d_kappa[kern::kMaxOut] = {};

  const auto& ts = td.t_by_group[0];
  const auto& ys = td.y_by_group[0];
  const std::size_t nD = ts.size();
  const std::size_t nC = coll.by_group[0].size();
  const double* flat = model.net.flat.data();

  LossValue L;
  const double sum_e2 =
      K.data_batch(nd, flat, ts.data(), 0.0, false, ys.data(), nD,
                   w.data_w * 2.0 / static_cast<double>(nD), d_net, nullptr);
  const double sum_r2 = K.phys_batch(nd, flat, coll.by_group[0].data(), 0.0, false, nC, co,
                                     w.physics_w * 2.0 / static_cast<double>(nC * static_cast<std::size_t>(m)),
                                     d_net, grad ? &d_g0 : nullptr, grad ? d_kappa : nullptr, nullptr);
  L.data = sum_e2 / static_cast<double>(nD);
  L.phys = sum_r2 / static_cast<double>(nC * static_cast<std::size_t>(m));

  // initial condition: outputs at tau = 0 against the surrogate targets
  const double t0 = 0.0;
  std::vector<double> u0(static_cast<std::size_t>(m));
  K.forward_eval(nd, flat, &t0, 0.0, false, 1, u0.data());
  std::vector<double> gu(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double tgt = k == 0 ? (n == 0 ? co.g0 : co.g0 + co.g[0]) : co.g[k];
    const double e = u0[static_cast<std::size_t>(k)] - tgt;
    L.ic += e * e;
    gu[static_cast<std::size_t>(k)] = w.ic_w * 2.0 * e;
  }

  if (grad) {
    K.seeded_reverse(nd, flat, &t0, 0.0, false, gu.data(), 1, d_net, nullptr);
    if (n == 0) {
      d_g0 -= gu[0];
    } else {
      d_g0 -= gu[0];
      d_g[0] -= gu[0];
      for (int k = 1; k < m; ++k) d_g[k] -= gu[static_cast<std::size_t>(k)];
    }
    double* gr = grad->data() + net_size;
    gr[0] = -co.g0 * d_g0;
    for (int i = 1; i <= n; ++i)
      gr[i] = -co.g[i - 1] * d_g[i - 1] - co.kappa[i - 1] * d_kappa[i - 1];
    double* gc = gr + n + 1;
    for (int i = 0; i < n; ++i) gc[i] = -co.kappa[i] * d_kappa[i];
  }
  return L;
}

// --- fused temperature evaluation ----------------------------------------------

void update_feature_scale(PinnTempModel& model, const TrainingData& td) {
  double sum = 0.0;
  for (double tn : td.temps_norm) sum += model.r0_norm(tn);
  model.feature_scale = sum / static_cast<double>(td.temps_norm.size());
}

LossValue eval_loss(const PinnTempModel& model, const TrainingData& td, const Collocation& coll,
                    const LossWeights& w, const kern::KernelTable& K, std::vector<double>* grad) {
  const int m = model.output_count();
  const int n = model.n_branches;
  const int nq = static_cast<int>(td.temps_norm.size());
  const kern::NetDims main_nd = kern::NetDims::from(model.main.spec);
  const kern::NetDims sub_nd = kern::NetDims::from(model.sub.spec);
  const std::size_t main_size = model.main.flat.size();
  const std::size_t sub_size = model.sub.flat.size();
  const double fs = model.feature_scale;

  // subnetwork forward at the training temperatures
  std::vector<double> zeta(static_cast<std::size_t>(nq));
  K.forward_eval(sub_nd, model.sub.flat.data(), td.temps_norm.data(), 0.0, false,
                 static_cast<std::size_t>(nq), zeta.data());
  std::vector<double> r0(static_cast<std::size_t>(nq)), xi(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    r0[static_cast<std::size_t>(q)] = std::exp(zeta[static_cast<std::size_t>(q)]);
    xi[static_cast<std::size_t>(q)] = r0[static_cast<std::size_t>(q)] / fs;
  }
  std::vector<double> lam(static_cast<std::size_t>(n)), cap(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    lam[static_cast<std::size_t>(i)] = std::exp(model.raw_scale[static_cast<std::size_t>(i)]);
    cap[static_cast<std::size_t>(i)] = std::exp(model.raw_c[static_cast<std::size_t>(i)]);
  }
  auto coeffs_at = [&](int q) {
    kern::StaticCoeffs co;
    co.n = n;
    co.g0 = 1.0 / r0[static_cast<std::size_t>(q)];
    for (int i = 0; i < n; ++i) {
      co.g[i] = 1.0 / (lam[static_cast<std::size_t>(i)] * r0[static_cast<std::size_t>(q)]);
      co.kappa[i] = co.g[i] / cap[static_cast<std::size_t>(i)];
    }
    return co;
  };

  double* d_main = nullptr;
  double* d_sub = nullptr;
  if (grad) {
    grad->assign(main_size + sub_size + model.raw_scale.size() + model.raw_c.size(), 0.0);
    d_main = grad->data();
    d_sub = grad->data() + main_size;
  }
  std::vector<double> d_xi(static_cast<std::size_t>(nq), 0.0);
  std::vector<double> d_g0(static_cast<std::size_t>(nq), 0.0);
  std::vector<double> d_g(static_cast<std::size_t>(n * nq), 0.0);
  std::vector<double> d_kap(static_cast<std::size_t>(n * nq), 0.0);

  const double* mflat = model.main.flat.data();
  const std::size_t nD = td.total;
  const std::size_t nC = coll.total();

  LossValue L;
  double sum_e2 = 0.0, sum_r2 = 0.0;
  for (int q = 0; q < nq; ++q) {
    const auto& ts = td.t_by_group[static_cast<std::size_t>(q)];
    const auto& ys = td.y_by_group[static_cast<std::size_t>(q)];
    sum_e2 += K.data_batch(main_nd, mflat, ts.data(), xi[static_cast<std::size_t>(q)], true,
                           ys.data(), ts.size(), w.data_w * 2.0 / static_cast<double>(nD), d_main,
                           grad ? &d_xi[static_cast<std::size_t>(q)] : nullptr);
  }
  for (int q = 0; q < nq; ++q) {
    const auto& cs = coll.by_group[static_cast<std::size_t>(q)];
    const kern::StaticCoeffs co = coeffs_at(q);
    double dg0 = 0.0, dk[kern::kMaxOut] = {};
    sum_r2 += K.phys_batch(main_nd, mflat, cs.data(), xi[static_cast<std::size_t>(q)], true,
                           cs.size(), co,
                           w.physics_w * 2.0 / static_cast<double>(nC * static_cast<std::size_t>(m)),
                           d_main, grad ? &dg0 : nullptr, grad ? dk : nullptr,
                           grad ? &d_xi[static_cast<std::size_t>(q)] : nullptr);
    if (grad) {
      d_g0[static_cast<std::size_t>(q)] += dg0;
      for (int i = 0; i < n; ++i) d_kap[static_cast<std::size_t>(i * nq + q)] += dk[i];
    }
  }
  L.data = sum_e2 / static_cast<double>(nD);
  L.phys = sum_r2 / static_cast<double>(nC * static_cast<std::size_t>(m));

  // initial condition, averaged over the training temperatures
  for (int q = 0; q < nq; ++q) {
    const kern::StaticCoeffs co = coeffs_at(q);
    const double t0 = 0.0;
    std::vector<double> u0(static_cast<std::size_t>(m));
    K.forward_eval(main_nd, mflat, &t0, xi[static_cast<std::size_t>(q)], true, 1, u0.data());
    std::vector<double> gu(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      const double tgt = k == 0 ? co.g0 + co.g[0] : co.g[k];
      const double e = u0[static_cast<std::size_t>(k)] - tgt;
      L.ic += e * e;
      gu[static_cast<std::size_t>(k)] = w.ic_w * (2.0 / static_cast<double>(nq)) * e;
    }
    if (grad) {
      K.seeded_reverse(main_nd, mflat, &t0, xi[static_cast<std::size_t>(q)], true, gu.data(), 1,
                       d_main, &d_xi[static_cast<std::size_t>(q)]);
      d_g0[static_cast<std::size_t>(q)] -= gu[0];
      d_g[static_cast<std::size_t>(0 * nq + q)] -= gu[0];
      for (int k = 1; k < m; ++k) d_g[static_cast<std::size_t>(k * nq + q)] -= gu[static_cast<std::size_t>(k)];
    }
  }
  L.ic /= static_cast<double>(nq);

  if (grad) {
    // chain the per-temperature coefficient gradients into the subnetwork
    // output zeta_q and the raw scalars
    std::vector<double> gu_sub(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) {
      const kern::StaticCoeffs co = coeffs_at(q);
      double acc = d_xi[static_cast<std::size_t>(q)] * (r0[static_cast<std::size_t>(q)] / fs) -
                   d_g0[static_cast<std::size_t>(q)] * co.g0;
      for (int i = 0; i < n; ++i) {
        acc -= d_g[static_cast<std::size_t>(i * nq + q)] * co.g[i];
        acc -= d_kap[static_cast<std::size_t>(i * nq + q)] * co.kappa[i];
      }
      gu_sub[static_cast<std::size_t>(q)] = acc;
    }
    K.seeded_reverse(sub_nd, model.sub.flat.data(), td.temps_norm.data(), 0.0, false,
                     gu_sub.data(), static_cast<std::size_t>(nq), d_sub, nullptr);

    double* g_scale = grad->data() + main_size + sub_size;
    double* g_cap = g_scale + n;
    for (int i = 0; i < n; ++i) {
      double as = 0.0, ac = 0.0;
      for (int q = 0; q < nq; ++q) {
        const kern::StaticCoeffs co = coeffs_at(q);
        as -= d_g[static_cast<std::size_t>(i * nq + q)] * co.g[i] +
              d_kap[static_cast<std::size_t>(i * nq + q)] * co.kappa[i];
        ac -= d_kap[static_cast<std::size_t>(i * nq + q)] * co.kappa[i];
      }
      g_scale[i] = as;
      g_cap[i] = ac;
    }
  }
  return L;
}

// --- tape reference evaluation --------------------------------------------------

namespace {

template <class Model>
LossValue eval_tape_impl(const Model& model, const TrainingData& td, const Collocation& coll,
                         const LossWeights& w, std::vector<double>* grad) {
  Tape tape;
  const TapeLoss tl = build_loss(tape, model, td, coll, w);
  LossValue L;
  L.data = tape.value(tl.data);
  L.phys = tape.value(tl.phys);
  L.ic = tape.value(tl.ic);
  if (grad) *grad = tape.grad(tl.total, tl.trainables);
  return L;
}

}  // namespace

LossValue eval_loss_tape(const PinnStaticModel& model, const TrainingData& td,
                         const Collocation& coll, const LossWeights& w,
                         std::vector<double>* grad) {
  return eval_tape_impl(model, td, coll, w, grad);
}
LossValue eval_loss_tape(const PinnTempModel& model, const TrainingData& td,
                         const Collocation& coll, const LossWeights& w,
                         std::vector<double>* grad) {
  return eval_tape_impl(model, td, coll, w, grad);
}

// --- training loop ---------------------------------------------------------------

namespace {

std::size_t network_param_count(const PinnStaticModel& m) { return m.net.flat.size(); }
std::size_t network_param_count(const PinnTempModel& m) {
  return m.main.flat.size() + m.sub.flat.size();
}

std::vector<std::string> trace_names(const PinnStaticModel& m) {
  std::vector<std::string> names{"R0"};
  for (int i = 1; i <= m.n_branches; ++i) {
    names.push_back("C" + std::to_string(i));
    names.push_back("R" + std::to_string(i));
  }
  return names;
}
std::vector<std::string> trace_names(const PinnTempModel& m) {
  std::vector<std::string> names;
  for (int i = 1; i <= m.n_branches; ++i) names.push_back("scale_" + std::to_string(i));
  for (int i = 1; i <= m.n_branches; ++i) names.push_back("C" + std::to_string(i));
  return names;
}

std::vector<double> trace_values(const PinnStaticModel& m) {
  std::vector<double> v{m.resistance(0)};
  for (int i = 1; i <= m.n_branches; ++i) {
    v.push_back(m.capacitance(i));
    v.push_back(m.resistance(i));
  }
  return v;
}
std::vector<double> trace_values(const PinnTempModel& m) {
  std::vector<double> v;
  for (int i = 1; i <= m.n_branches; ++i) v.push_back(m.scale(i));
  for (int i = 1; i <= m.n_branches; ++i) v.push_back(m.capacitance(i));
  return v;
}

void pre_step(PinnStaticModel&, const TrainingData&) {}
void pre_step(PinnTempModel& m, const TrainingData& td) { update_feature_scale(m, td); }

void warm_start(PinnStaticModel&, const TrainingData&, const kern::KernelTable&,
                const TrainConfig&) {}

// Anchors the subnetwork to the observed steady conduction level per
// temperature: zeta(T~) is regressed onto log(1 / late-time current), which
// fixes both the scale and the physical orientation of r0(T). The
// capacitance scalars are then set so the mean initial decay rate spans a
// plausible fraction of the window.
void warm_start(PinnTempModel& model, const TrainingData& td, const kern::KernelTable& K,
                const TrainConfig& cfg) {
  if (cfg.subnet_warmup_steps <= 0 || cfg.freeze_scalars) return;
  const int nq = static_cast<int>(td.temps_norm.size());
  std::vector<double> tgt(static_cast<std::size_t>(nq));
  for (int q = 0; q < nq; ++q) {
    const auto& ys = td.y_by_group[static_cast<std::size_t>(q)];
    const std::size_t tail = std::max<std::size_t>(3, ys.size() / 4);
    double level = 0.0;
    for (std::size_t j = ys.size() - std::min(tail, ys.size()); j < ys.size(); ++j) level += ys[j];
    level = std::max(level / static_cast<double>(std::min(tail, ys.size())), 1e-6);
    tgt[static_cast<std::size_t>(q)] = -std::log(level);
  }

  const kern::NetDims snd = kern::NetDims::from(model.sub.spec);
  std::vector<double*> slots;
  for (auto& v : model.sub.flat) slots.push_back(&v);
  Adam adam(slots.size(), cfg.adam);
  std::vector<double> zeta(static_cast<std::size_t>(nq)), gu(static_cast<std::size_t>(nq));
  std::vector<double> g(model.sub.flat.size());
  for (long s = 0; s < cfg.subnet_warmup_steps; ++s) {
    K.forward_eval(snd, model.sub.flat.data(), td.temps_norm.data(), 0.0, false,
                   static_cast<std::size_t>(nq), zeta.data());
    for (int q = 0; q < nq; ++q)
      gu[static_cast<std::size_t>(q)] =
          2.0 * (zeta[static_cast<std::size_t>(q)] - tgt[static_cast<std::size_t>(q)]) / nq;
    std::fill(g.begin(), g.end(), 0.0);
    K.seeded_reverse(snd, model.sub.flat.data(), td.temps_norm.data(), 0.0, false, gu.data(),
                     static_cast<std::size_t>(nq), g.data(), nullptr);
    adam.step(slots, g, cfg.lr0);
  }

  // mean initial amplitude g1 = g0 / lambda; aim the mean decay rate at a
  // handful of e-folds across the unit window
  double mean_g1 = 0.0;
  for (int q = 0; q < nq; ++q)
    mean_g1 += std::exp(-zeta[static_cast<std::size_t>(q)] - model.raw_scale[0]);
  mean_g1 /= nq;
  const double kappa_target = 5.0;
  for (auto& c : model.raw_c) c = std::log(mean_g1 / kappa_target);
}

template <class Model, class Truth>
TrainResult train_impl(Model& model, const Dataset& data, const Truth* truth,
                       const TrainConfig& cfg, const LossWeights& w) {
  const auto t_begin = std::chrono::steady_clock::now();
  const TrainingData td = prepare_training_data(data);
  check_norm_matches(model.norm, td.norm);

  const Collocation coll =
      td.temperature
          ? collocation_temperature(cfg.collocation, static_cast<int>(td.temps_norm.size()), cfg.seed)
          : collocation_static(cfg.collocation);

  const kern::KernelTable& K = kern::select_kernels(cfg.backend);
  auto slots = trainable_slots(model);
  Adam adam(slots.size(), cfg.adam);
  std::vector<double> grad;

  TrainTrace trace;
  trace.param_names = trace_names(model);

  auto evaluate = [&](std::vector<double>* g) {
    pre_step(model, td);
    return cfg.use_tape ? eval_loss_tape(model, td, coll, w, g)
                        : eval_loss(model, td, coll, w, K, g);
  };

  if (cfg.iterations > 0) warm_start(model, td, K, cfg);

  for (long step = 0; step < cfg.iterations; ++step) {
    const LossValue L = evaluate(&grad);
    if (!std::isfinite(L.data) || !std::isfinite(L.phys) || !std::isfinite(L.ic))
      throw TrainingAborted(step, L.data, L.phys, L.ic);
    const double lr = cfg.lr_at(step);
    if (step % cfg.log_every == 0)
      trace.rows.push_back({step, L.data, L.phys, L.ic, lr, trace_values(model)});
    if (cfg.freeze_scalars)
      for (std::size_t i = network_param_count(model); i < grad.size(); ++i) grad[i] = 0.0;
    adam.step(slots, grad, lr);
  }

  const LossValue Lf = evaluate(nullptr);
  if (!std::isfinite(Lf.data) || !std::isfinite(Lf.phys) || !std::isfinite(Lf.ic))
    throw TrainingAborted(cfg.iterations, Lf.data, Lf.phys, Lf.ic);
  trace.rows.push_back(
      {cfg.iterations, Lf.data, Lf.phys, Lf.ic, cfg.lr_at(cfg.iterations), trace_values(model)});

  TrainResult result;
  result.trace = std::move(trace);
  FitReport& rep = result.report;
  rep.method = "pinn";
  rep.variant = td.temperature ? "temperature" : "static";
  rep.params = model.materialize_params();
  if (truth) rep.truth = canonical_params(*truth);
  rep.loss_data = Lf.data;
  rep.loss_phys = Lf.phys;
  rep.loss_ic = Lf.ic;
  rep.data_seed = data.seed;
  rep.train_seed = cfg.seed;
  rep.config_echo = {
      {"iterations", std::to_string(cfg.iterations)},
      {"lr0", fmt17(cfg.lr0)},
      {"decay_factor", fmt17(cfg.decay_factor)},
      {"decay_every", std::to_string(cfg.decay_every)},
      {"collocation", std::to_string(cfg.collocation)},
      {"log_every", std::to_string(cfg.log_every)},
      {"engine", cfg.use_tape ? "tape" : K.name},
      {"loss_weights", fmt17(w.data_w) + " " + fmt17(w.physics_w) + " " + fmt17(w.ic_w)},
      {"sigma", fmt17(data.sigma)},
  };
  rep.checkpoint = model.checkpoint();
  rep.wallclock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return result;
}

}  // namespace

TrainResult train(PinnStaticModel& model, const Dataset& data, const EcmSpec* truth,
                  const TrainConfig& cfg, const LossWeights& w) {
  return train_impl(model, data, truth, cfg, w);
}

TrainResult train(PinnTempModel& model, const Dataset& data, const TempEcmSpec* truth,
                  const TrainConfig& cfg, const LossWeights& w) {
  return train_impl(model, data, truth, cfg, w);
}

}  // namespace rcpinn
