#pragma once

#ifdef QTOMO_OMP
#include <omp.h>
#define QTOMO_OMP_PRAGMA(content) _Pragma(content)
#else
#define QTOMO_OMP_PRAGMA(content)
#endif

namespace qtomo {

inline int max_threads() {
#ifdef QTOMO_OMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef QTOMO_OMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace qtomo
