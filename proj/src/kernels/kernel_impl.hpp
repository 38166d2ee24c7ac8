#pragma once

// Shared implementation of the fused PINN loss kernels, templated over the
// lane type V (ScalarVec reference variant, AvxVec SIMD variant). Points are
// processed in blocks of V::width; tail lanes repeat the last point and are
// zeroed out through the gradient seeds, so they contribute exactly nothing.
//
// Each block runs: MLP forward (optionally with the time-direction tangent
// riding along), per-point loss seeds, then a hand-derived reverse pass that
// backpropagates through both the primal and the tangent computation. That
// reverse-through-tangent is what delivers d(loss)/d(weights) for residuals
// containing du/dt; its correctness is pinned to the tape engine by the
// equivalence tests.

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

#include "rcpinn/kernels.hpp"
#include "vecmath.hpp"

namespace rcpinn::kern {

template <class V>
struct Kern {
  static constexpr int W = V::width;

  struct Buf {
    V a[kMaxHidden][kMaxWidth];   // activations
    V s[kMaxHidden][kMaxWidth];   // 1 - a^2
    V zt[kMaxHidden][kMaxWidth];  // pre-activation tangents
    V at[kMaxHidden][kMaxWidth];  // post-activation tangents
    V u[kMaxOut];                 // outputs
    V vt[kMaxOut];                // output tangents du/dx0
  };

  static V load_pad(const double* p, std::size_t i0, std::size_t n) {
    if (i0 + W <= n) return V::load(p + i0);
    double tmp[W];
    for (int j = 0; j < W; ++j) tmp[j] = p[std::min(i0 + j, n - 1)];
    return V::load(tmp);
  }

  static V lane_mask(std::size_t i0, std::size_t n) {
    double tmp[W];
    for (int j = 0; j < W; ++j) tmp[j] = i0 + j < n ? 1.0 : 0.0;
    return V::load(tmp);
  }

  template <bool Tangent>
  static void forward_block(const NetDims& nd, const double* P, V X0, V X1, bool has_x1, Buf& b) {
    int off = 0;
    int prev = nd.in;
    for (int l = 0; l < nd.n_hidden; ++l) {
      const int h = nd.hidden_width(l);
      const double* Wp = P + off;
      const double* Bp = Wp + h * prev;
      for (int r = 0; r < h; ++r) {
        V z, d;
        if (l == 0) {
          z = V::fma(V::splat(Wp[r * prev + 0]), X0, V::splat(Bp[r]));
          if (has_x1) z = V::fma(V::splat(Wp[r * prev + 1]), X1, z);
          if constexpr (Tangent) d = V::splat(Wp[r * prev + 0]);  // input tangent is (1, 0)
        } else {
          z = V::splat(Bp[r]);
          if constexpr (Tangent) d = V::zero();
          for (int c = 0; c < prev; ++c) {
            const V w = V::splat(Wp[r * prev + c]);
            z = V::fma(w, b.a[l - 1][c], z);
            if constexpr (Tangent) d = V::fma(w, b.at[l - 1][c], d);
          }
        }
        const V th = vtanh(z);
        b.a[l][r] = th;
        b.s[l][r] = V::fnma(th, th, V::splat(1.0));
        if constexpr (Tangent) {
          b.zt[l][r] = d;
          b.at[l][r] = b.s[l][r] * d;
        }
      }
      off += h * (prev + 1);
      prev = h;
    }
    const double* Wp = P + off;
    const double* Bp = Wp + nd.out * prev;
    const int L = nd.n_hidden - 1;
    for (int k = 0; k < nd.out; ++k) {
      V z = V::splat(Bp[k]);
      V d = V::zero();
      for (int c = 0; c < prev; ++c) {
        const V w = V::splat(Wp[k * prev + c]);
        z = V::fma(w, b.a[L][c], z);
        if constexpr (Tangent) d = V::fma(w, b.at[L][c], d);
      }
      b.u[k] = z;
      if constexpr (Tangent) b.vt[k] = d;
    }
  }

  // gu/gv are the loss adjoints of u and vt; they carry the lane mask, so
  // every accumulation below is already masked.
  template <bool Tangent>
  static void reverse_block(const NetDims& nd, const double* P, V X0, V X1, bool has_x1,
                            const Buf& b, const V* gu, const V* gv, V* acc, V* dx1_acc) {
    const int last = nd.last_width();
    const int L = nd.n_hidden - 1;
    const int off_out = nd.param_count() - nd.out * (last + 1);
    const double* Wo = P + off_out;

    V A[kMaxWidth], D[kMaxWidth];
    for (int j = 0; j < last; ++j) {
      V aj = V::zero(), dj = V::zero();
      for (int k = 0; k < nd.out; ++k) {
        const V w = V::splat(Wo[k * last + j]);
        aj = V::fma(w, gu[k], aj);
        if constexpr (Tangent) dj = V::fma(w, gv[k], dj);
      }
      A[j] = aj;
      if constexpr (Tangent) D[j] = dj;
    }
    {
      V* accW = acc + off_out;
      V* accB = accW + nd.out * last;
      for (int k = 0; k < nd.out; ++k) {
        for (int c = 0; c < last; ++c) {
          V g = V::fma(gu[k], b.a[L][c], accW[k * last + c]);
          if constexpr (Tangent) g = V::fma(gv[k], b.at[L][c], g);
          accW[k * last + c] = g;
        }
        accB[k] = accB[k] + gu[k];
      }
    }

    for (int l = L; l >= 0; --l) {
      const int h = nd.hidden_width(l);
      const int pin = l == 0 ? nd.in : nd.hidden_width(l - 1);
      int off_l = 0;
      for (int k = 0; k < l; ++k)
        off_l += nd.hidden_width(k) * ((k == 0 ? nd.in : nd.hidden_width(k - 1)) + 1);

      V Az[kMaxWidth], Dz[kMaxWidth];
      for (int r = 0; r < h; ++r) {
        V Aa = A[r];
        if constexpr (Tangent) {
          // a also feeds the tangent through s = 1 - a^2
          const V t = b.zt[l][r] * D[r];
          Aa = V::fnma(b.a[l][r] + b.a[l][r], t, Aa);
          Dz[r] = b.s[l][r] * D[r];
        }
        Az[r] = b.s[l][r] * Aa;
      }

      V* accW = acc + off_l;
      V* accB = accW + h * pin;
      const double* Wl = P + off_l;
      if (l == 0) {
        V dx1 = V::zero();
        for (int r = 0; r < h; ++r) {
          V g0 = V::fma(Az[r], X0, accW[r * pin + 0]);
          if constexpr (Tangent) g0 = g0 + Dz[r];  // d(zt)/d(w_r0) = 1
          accW[r * pin + 0] = g0;
          if (has_x1) {
            accW[r * pin + 1] = V::fma(Az[r], X1, accW[r * pin + 1]);
            if (dx1_acc) dx1 = V::fma(V::splat(Wl[r * pin + 1]), Az[r], dx1);
          }
          accB[r] = accB[r] + Az[r];
        }
        if (dx1_acc) *dx1_acc = *dx1_acc + dx1;
      } else {
        V An[kMaxWidth], Dn[kMaxWidth];
        for (int c = 0; c < pin; ++c) {
          An[c] = V::zero();
          if constexpr (Tangent) Dn[c] = V::zero();
        }
        for (int r = 0; r < h; ++r) {
          for (int c = 0; c < pin; ++c) {
            const V w = V::splat(Wl[r * pin + c]);
            V g = V::fma(Az[r], b.a[l - 1][c], accW[r * pin + c]);
            if constexpr (Tangent) {
              g = V::fma(Dz[r], b.at[l - 1][c], g);
              Dn[c] = V::fma(w, Dz[r], Dn[c]);
            }
            accW[r * pin + c] = g;
            An[c] = V::fma(w, Az[r], An[c]);
          }
          accB[r] = accB[r] + Az[r];
        }
        for (int c = 0; c < pin; ++c) {
          A[c] = An[c];
          if constexpr (Tangent) D[c] = Dn[c];
        }
      }
    }
  }

  // SeedFn(i0, u, vt, mask, gu, gv) -> masked squared-error contribution.
  template <bool Tangent, class SeedFn>
  static double run(const NetDims& nd, const double* P, const double* x0, double x1v, bool has_x1,
                    std::size_t n, SeedFn&& seed, double* d_params, double* d_x1_sum) {
    assert(nd.in == (has_x1 ? 2 : 1));
    assert(nd.out <= kMaxOut && nd.h0 <= kMaxWidth && nd.h1 <= kMaxWidth);
    std::vector<V> acc;
    if (d_params) acc.assign(static_cast<std::size_t>(nd.param_count()), V::zero());
    V loss = V::zero();
    V dx1 = V::zero();
    const V X1 = V::splat(x1v);
    Buf b;
    for (std::size_t i0 = 0; i0 < n; i0 += W) {
      const V X0 = load_pad(x0, i0, n);
      const V mask = lane_mask(i0, n);
      forward_block<Tangent>(nd, P, X0, X1, has_x1, b);
      V gu[kMaxOut], gv[kMaxOut];
      loss = loss + seed(i0, b.u, b.vt, mask, gu, gv);
      if (d_params)
        reverse_block<Tangent>(nd, P, X0, X1, has_x1, b, gu, gv, acc.data(),
                               d_x1_sum ? &dx1 : nullptr);
    }
    if (d_params)
      for (int p = 0; p < nd.param_count(); ++p) d_params[p] += acc[static_cast<std::size_t>(p)].hsum();
    if (d_x1_sum) *d_x1_sum += dx1.hsum();
    return loss.hsum();
  }

  // --- public entry points --------------------------------------------------

  static void forward_eval(const NetDims& nd, const double* P, const double* x0, double x1v,
                           bool has_x1, std::size_t n, double* u) {
    auto fn = [&](std::size_t i0, const V* uo, const V*, V, V*, V*) -> V {
      for (int k = 0; k < nd.out; ++k) {
        double tmp[W];
        uo[k].store(tmp);
        for (int j = 0; j < W && i0 + j < n; ++j) u[(i0 + j) * nd.out + k] = tmp[j];
      }
      return V::zero();
    };
    run<false>(nd, P, x0, x1v, has_x1, n, fn, nullptr, nullptr);
  }

  static void seeded_reverse(const NetDims& nd, const double* P, const double* x0, double x1v,
                             bool has_x1, const double* gu_in, std::size_t n, double* d_params,
                             double* d_x1_sum) {
    auto fn = [&](std::size_t i0, const V*, const V*, V mask, V* gu, V* gv) -> V {
      for (int k = 0; k < nd.out; ++k) {
        double tmp[W];
        for (int j = 0; j < W; ++j)
          tmp[j] = i0 + j < n ? gu_in[(i0 + j) * nd.out + k] : 0.0;
        gu[k] = V::load(tmp);
        gv[k] = V::zero();
      }
      (void)mask;
      return V::zero();
    };
    run<false>(nd, P, x0, x1v, has_x1, n, fn, d_params, d_x1_sum);
  }

  static double data_batch(const NetDims& nd, const double* P, const double* x0, double x1v,
                           bool has_x1, const double* y, std::size_t n, double seed_scale,
                           double* d_params, double* d_x1_sum) {
    const V s = V::splat(seed_scale);
    auto fn = [&](std::size_t i0, const V* u, const V*, V mask, V* gu, V* gv) -> V {
      V e = u[0];
      for (int k = 1; k < nd.out; ++k) e = e + u[k];
      e = (e - load_pad(y, i0, n)) * mask;
      const V ge = s * e;
      for (int k = 0; k < nd.out; ++k) {
        gu[k] = ge;
        gv[k] = V::zero();
      }
      return e * e;
    };
    return run<false>(nd, P, x0, x1v, has_x1, n, fn, d_params, d_x1_sum);
  }

  static double phys_batch(const NetDims& nd, const double* P, const double* x0, double x1v,
                           bool has_x1, std::size_t n, const StaticCoeffs& co, double seed_scale,
                           double* d_params, double* d_g0, double* d_kappa, double* d_x1_sum) {
    const V s = V::splat(seed_scale);
    V acc_dg0 = V::zero();
    V acc_dk[kMaxOut];
    for (int i = 0; i < kMaxOut; ++i) acc_dk[i] = V::zero();

    auto fn = [&](std::size_t, const V* u, const V* vt, V mask, V* gu, V* gv) -> V {
      if (co.n == 0) {
        const V r = vt[0] * mask;
        gv[0] = s * r;
        gu[0] = V::zero();
        return r * r;
      }
      const V k0 = V::splat(co.kappa[0]);
      const V um = u[0] - V::splat(co.g0);
      V r = V::fma(k0, um, vt[0]) * mask;
      V sr = s * r;
      gv[0] = sr;
      gu[0] = k0 * sr;
      acc_dk[0] = V::fma(sr, um, acc_dk[0]);
      acc_dg0 = V::fnma(k0, sr, acc_dg0);
      V loss = r * r;
      for (int i = 1; i < co.n; ++i) {
        const V ki = V::splat(co.kappa[i]);
        r = V::fma(ki, u[i], vt[i]) * mask;
        sr = s * r;
        gv[i] = sr;
        gu[i] = ki * sr;
        acc_dk[i] = V::fma(sr, u[i], acc_dk[i]);
        loss = V::fma(r, r, loss);
      }
      return loss;
    };
    const double L = run<true>(nd, P, x0, x1v, has_x1, n, fn, d_params, d_x1_sum);
    if (d_g0) *d_g0 += acc_dg0.hsum();
    if (d_kappa)
      for (int i = 0; i < co.n; ++i) d_kappa[i] += acc_dk[i].hsum();
    return L;
  }

  static KernelTable table(const char* name) {
    return KernelTable{name, &forward_eval, &seeded_reverse, &data_batch, &phys_batch};
  }
};

}  // namespace rcpinn::kern
