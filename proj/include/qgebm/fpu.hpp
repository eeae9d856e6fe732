#pragma once

#if defined(__SSE2__) || defined(__x86_64__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace qgebm {

// Flush subnormals to zero. Decaying high modes otherwise drift into the
// denormal range and stall the FPU; flushing them is both faster and the
// numerically intended behavior for spectral tails.
inline void enable_flush_to_zero() {
#if defined(__SSE2__) || defined(__x86_64__)
  _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
  _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
#endif
}

}  // namespace qgebm
