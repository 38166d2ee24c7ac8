#include "rcpinn/kernels.hpp"

#include <stdexcept>

namespace rcpinn::kern {

#if defined(RCPINN_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

NetDims NetDims::from(const MlpSpec& spec) {
  if (spec.input_dim < 1 || spec.input_dim > 2)
    throw std::invalid_argument("kernels support 1 or 2 inputs");
  if (spec.hidden.size() < 1 || spec.hidden.size() > kMaxHidden)
    throw std::invalid_argument("kernels support 1 or 2 hidden layers");
  if (spec.output_dim < 1 || spec.output_dim > kMaxOut)
    throw std::invalid_argument("too many outputs for the kernels");
  NetDims nd;
  nd.in = spec.input_dim;
  nd.out = spec.output_dim;
  nd.n_hidden = static_cast<int>(spec.hidden.size());
  nd.h0 = spec.hidden[0];
  nd.h1 = nd.n_hidden == 2 ? spec.hidden[1] : 0;
  if (nd.h0 > kMaxWidth || nd.h1 > kMaxWidth)
    throw std::invalid_argument("hidden layer too wide for the kernels");
  return nd;
}

int NetDims::param_count() const {
  int n = h0 * (in + 1);
  int prev = h0;
  if (n_hidden == 2) {
    n += h1 * (h0 + 1);
    prev = h1;
  }
  return n + out * (prev + 1);
}

const KernelTable* simd_kernels() {
#if defined(RCPINN_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_kernels();
#endif
  return nullptr;
}

const KernelTable& select_kernels(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return scalar_kernels();
    case Backend::Simd: {
      const KernelTable* t = simd_kernels();
      if (!t) throw std::runtime_error("no SIMD kernel variant available on this CPU");
      return *t;
    }
    case Backend::Auto:
    default: {
      const KernelTable* t = simd_kernels();
      return t ? *t : scalar_kernels();
    }
  }
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const KernelTable* t = simd_kernels()) out.push_back(t);
  return out;
}

}  // namespace rcpinn::kern
