// Compiled with -mavx2 -mfma; only reached through runtime dispatch.

#include "kernel_impl.hpp"

namespace rcpinn::kern {

#if defined(__AVX2__) && defined(__FMA__)

const KernelTable& avx2_kernels() {
  static const KernelTable t = Kern<AvxVec>::table("avx2");
  return t;
}

#endif

}  // namespace rcpinn::kern
