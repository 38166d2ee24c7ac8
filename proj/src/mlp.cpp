#include "rcpinn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcpinn {

std::pair<int, int> MlpSpec::layer_shape(int l) const {
  const int nl = layer_count();
  if (l < 0 || l >= nl) throw std::out_of_range("MlpSpec::layer_shape");
  const int fi = l == 0 ? input_dim : hidden[l - 1];
  const int fo = l == nl - 1 ? output_dim : hidden[l];
  return {fo, fi};
}

int MlpSpec::param_count() const {
  int n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    const auto [fo, fi] = layer_shape(l);
    n += fo * (fi + 1);
  }
  return n;
}

int MlpParams::layer_offset(int l) const {
  int off = 0;
  for (int k = 0; k < l; ++k) {
    const auto [fo, fi] = spec.layer_shape(k);
    off += fo * (fi + 1);
  }
  return off;
}

double& MlpParams::w(int l, int r, int c) {
  const auto [fo, fi] = spec.layer_shape(l);
  (void)fo;
  return flat[layer_offset(l) + r * fi + c];
}
double MlpParams::w(int l, int r, int c) const { return const_cast<MlpParams*>(this)->w(l, r, c); }
double& MlpParams::b(int l, int r) {
  const auto [fo, fi] = spec.layer_shape(l);
  return flat[layer_offset(l) + fo * fi + r];
}
double MlpParams::b(int l, int r) const { return const_cast<MlpParams*>(this)->b(l, r); }

MlpParams MlpParams::init(const MlpSpec& spec, Xoshiro256& rng) {
  MlpParams p;
  p.spec = spec;
  p.flat.assign(spec.param_count(), 0.0);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const auto [fo, fi] = spec.layer_shape(l);
    const double bound = std::sqrt(6.0 / (fi + fo));
    for (int r = 0; r < fo; ++r)
      for (int c = 0; c < fi; ++c) p.w(l, r, c) = rng.uniform(-bound, bound);
    // biases stay zero
  }
  return p;
}

std::vector<double> mlp_eval(const MlpParams& p, std::span<const double> x) {
  std::vector<double> act(x.begin(), x.end());
  for (int l = 0; l < p.spec.layer_count(); ++l) {
    const auto [fo, fi] = p.spec.layer_shape(l);
    std::vector<double> next(fo);
    for (int r = 0; r < fo; ++r) {
      double z = p.b(l, r);
      for (int c = 0; c < fi; ++c) z += p.w(l, r, c) * act[c];
      next[r] = l + 1 < p.spec.layer_count() ? std::tanh(z) : z;
    }
    act = std::move(next);
  }
  return act;
}

std::vector<Var> make_leaves(Tape& tape, std::span<const double> values) {
  std::vector<Var> leaves;
  leaves.reserve(values.size());
  for (double v : values) leaves.push_back(tape.var(v));
  return leaves;
}

// --- static variant ---------------------------------------------------------

PinnStaticModel PinnStaticModel::make(int n_branches, const std::vector<int>& hidden,
                                      const NormalizationInfo& norm, double u_dc,
                                      std::uint64_t seed) {
  PinnStaticModel m;
  m.n_branches = n_branches;
  m.norm = norm;
  m.u_dc = u_dc;
  MlpSpec spec;
  spec.input_dim = 1;
  spec.output_dim = std::max(n_branches, 1);
  spec.hidden = hidden;
  Xoshiro256 rng(seed);
  m.net = MlpParams::init(spec, rng);
  m.raw_r.assign(n_branches + 1, 0.0);
  m.raw_c.assign(n_branches, 0.0);
  return m;
}

std::vector<ParamValue> PinnStaticModel::materialize_params() const {
  std::vector<ParamValue> out;
  out.push_back({"R0", resistance(0)});
  std::vector<int> order(n_branches);
  for (int i = 0; i < n_branches; ++i) order[i] = i + 1;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return resistance(a) * capacitance(a) < resistance(b) * capacitance(b);
  });
  for (int k = 0; k < n_branches; ++k) {
    out.push_back({"C" + std::to_string(k + 1), capacitance(order[k])});
    out.push_back({"R" + std::to_string(k + 1), resistance(order[k])});
  }
  return out;
}

double PinnStaticModel::predict_total(double t) const {
  const double tn = norm.norm_t(t);
  const auto u = mlp_eval(net, std::span<const double>(&tn, 1));
  double sum = 0.0;
  for (double uk : u) sum += uk;
  return norm.denorm_current(sum);
}

std::vector<std::pair<std::string, double>> PinnStaticModel::checkpoint() const {
  std::vector<std::pair<std::string, double>> kv;
  for (int l = 0; l < net.spec.layer_count(); ++l) {
    const auto [fo, fi] = net.spec.layer_shape(l);
    for (int r = 0; r < fo; ++r)
      for (int c = 0; c < fi; ++c)
        kv.push_back({"net.l" + std::to_string(l) + ".w." + std::to_string(r) + "." +
                          std::to_string(c),
                      net.w(l, r, c)});
    for (int r = 0; r < fo; ++r)
      kv.push_back({"net.l" + std::to_string(l) + ".b." + std::to_string(r), net.b(l, r)});
  }
  for (std::size_t i = 0; i < raw_r.size(); ++i)
    kv.push_back({"raw.r" + std::to_string(i), raw_r[i]});
  for (std::size_t i = 0; i < raw_c.size(); ++i)
    kv.push_back({"raw.c" + std::to_string(i + 1), raw_c[i]});
  return kv;
}

std::vector<double*> trainable_slots(PinnStaticModel& m) {
  std::vector<double*> slots;
  slots.reserve(m.net.flat.size() + m.raw_r.size() + m.raw_c.size());
  for (auto& v : m.net.flat) slots.push_back(&v);
  for (auto& v : m.raw_r) slots.push_back(&v);
  for (auto& v : m.raw_c) slots.push_back(&v);
  return slots;
}

// --- temperature variant ----------------------------------------------------

PinnTempModel PinnTempModel::make(int n_branches, const std::vector<int>& main_hidden,
                                  const std::vector<int>& sub_hidden,
                                  const NormalizationInfo& norm, double u_dc,
                                  std::uint64_t seed) {
  if (n_branches < 1)
    throw std::invalid_argument("PinnTempModel: at least one branch is required");
  PinnTempModel m;
  m.n_branches = n_branches;
  m.norm = norm;
  m.u_dc = u_dc;
  MlpSpec main_spec;
  main_spec.input_dim = 2;
  main_spec.output_dim = std::max(n_branches, 1);
  main_spec.hidden = main_hidden;
  MlpSpec sub_spec;
  sub_spec.input_dim = 1;
  sub_spec.output_dim = 1;
  sub_spec.hidden = sub_hidden;
  Xoshiro256 rng(seed);
  m.main = MlpParams::init(main_spec, rng);
  m.sub = MlpParams::init(sub_spec, rng);
  m.raw_scale.assign(n_branches, 0.0);
  m.raw_c.assign(n_branches, 0.0);
  return m;
}

double PinnTempModel::r0_norm(double temp_norm) const {
  const auto z = mlp_eval(sub, std::span<const double>(&temp_norm, 1));
  return std::exp(z[0]);
}

double PinnTempModel::r0_phys(double temp_phys) const {
  return r_ref() * r0_norm(norm.norm_temp(temp_phys));
}

double PinnTempModel::predict_total(double t, double temp) const {
  const double x[2] = {norm.norm_t(t), r0_norm(norm.norm_temp(temp)) / feature_scale};
  const auto u = mlp_eval(main, x);
  double sum = 0.0;
  for (double uk : u) sum += uk;
  return norm.denorm_current(sum);
}

std::vector<ParamValue> PinnTempModel::materialize_params() const {
  std::vector<ParamValue> out;
  for (int i = 1; i <= n_branches; ++i)
    out.push_back({"scale_" + std::to_string(i), scale(i)});
  for (int i = 1; i <= n_branches; ++i)
    out.push_back({"C" + std::to_string(i), capacitance(i)});
  return out;
}

std::vector<std::pair<double, double>> PinnTempModel::r0_curve(std::span<const double> temps) const {
  std::vector<std::pair<double, double>> out;
  out.reserve(temps.size());
  for (double T : temps) out.push_back({T, r0_phys(T)});
  return out;
}

std::vector<std::pair<std::string, double>> PinnTempModel::checkpoint() const {
  std::vector<std::pair<std::string, double>> kv;
  auto dump = [&kv](const MlpParams& p, const std::string& prefix) {
    for (int l = 0; l < p.spec.layer_count(); ++l) {
      const auto [fo, fi] = p.spec.layer_shape(l);
      for (int r = 0; r < fo; ++r)
        for (int c = 0; c < fi; ++c)
          kv.push_back({prefix + ".l" + std::to_string(l) + ".w." + std::to_string(r) + "." +
                            std::to_string(c),
                        p.w(l, r, c)});
      for (int r = 0; r < fo; ++r)
        kv.push_back({prefix + ".l" + std::to_string(l) + ".b." + std::to_string(r), p.b(l, r)});
    }
  };
  dump(main, "main");
  dump(sub, "sub");
  for (std::size_t i = 0; i < raw_scale.size(); ++i)
    kv.push_back({"raw.scale" + std::to_string(i + 1), raw_scale[i]});
  for (std::size_t i = 0; i < raw_c.size(); ++i)
    kv.push_back({"raw.c" + std::to_string(i + 1), raw_c[i]});
  kv.push_back({"feature_scale", feature_scale});
  return kv;
}

std::vector<double*> trainable_slots(PinnTempModel& m) {
  std::vector<double*> slots;
  slots.reserve(m.main.flat.size() + m.sub.flat.size() + m.raw_scale.size() + m.raw_c.size());
  for (auto& v : m.main.flat) slots.push_back(&v);
  for (auto& v : m.sub.flat) slots.push_back(&v);
  for (auto& v : m.raw_scale) slots.push_back(&v);
  for (auto& v : m.raw_c) slots.push_back(&v);
  return slots;
}

}  // namespace rcpinn
