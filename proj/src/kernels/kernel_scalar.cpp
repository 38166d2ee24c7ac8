#include "kernel_impl.hpp"

namespace rcpinn::kern {

const KernelTable& scalar_kernels() {
  static const KernelTable t = Kern<ScalarVec>::table("scalar");
  return t;
}

}  // namespace rcpinn::kern
