#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dimest {

// Parallel map over [0, n). Each index must write only its own slots; with
// that discipline results are bit-identical for any thread count. Reductions
// are done afterwards in fixed index order by the caller.
template <class F>
inline void parallel_for(long n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) f(static_cast<int>(i));
#else
    for (long i = 0; i < n; ++i) f(static_cast<int>(i));
#endif
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace dimest
