#include "spde/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace spde::parallel {

namespace {
std::atomic<int> configured{0};
}

int threads() {
    const int n = configured.load();
    if (n > 0) return n;
    if (const char* env = std::getenv("SPDE_LAB_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) { configured.store(n > 0 ? n : 0); }

double ordered_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

} // namespace spde::parallel
