#include "mlppde/version.hpp"

namespace mlppde {

const char* build_id() {
#if defined(__VERSION__)
  return "gcc-" __VERSION__;
#else
  return "unknown-compiler";
#endif
}

} // namespace mlppde
