#pragma once

// Include this instead of <omp.h>: the code still builds without OpenMP.
#if defined(_OPENMP)
#include <omp.h>
#endif

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace spde::parallel {

#if defined(_OPENMP)
inline constexpr bool use_omp = true;
#else
inline constexpr bool use_omp = false;
#endif

// Worker count used by the replica loops. Resolution order: explicit
// set_threads(), then SPDE_LAB_THREADS, then the OpenMP default.
int threads();
void set_threads(int n);

// out[r] = fn(r) for r in [0, n). Each replica writes only its own slot, so
// the result (and any ordered reduction over it) does not depend on the
// number of workers.
template <typename T, typename Fn>
std::vector<T> map_replicas(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    const auto count = static_cast<std::int64_t>(n);
    // Exceptions may not cross the parallel region; keep the first one.
    std::exception_ptr failure;
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads())
#endif
    for (std::int64_t r = 0; r < count; ++r) {
        try {
            out[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
        } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(spde_map_replicas_failure)
#endif
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

// Left-to-right sum; the fixed order keeps totals bit-stable.
double ordered_sum(const std::vector<double>& v);

} // namespace spde::parallel

namespace spde::serial {

// Reference counterpart of parallel::map_replicas, kept for testing and
// benchmarking.
template <typename T, typename Fn>
std::vector<T> map_replicas(std::size_t n, Fn&& fn) {
    std::vector<T> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = fn(r);
    return out;
}

} // namespace spde::serial
