#include "drawdown/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace drawdown {

int worker_threads() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const char* cap = std::getenv("DRAWDOWN_THREADS")) {
        try {
            const int v = std::stoi(cap);
            if (v > 0 && v < n) n = v;
        } catch (...) {
            // unparseable cap is ignored
        }
    }
    return n;
}

unsigned long long path_seed(unsigned long long seed, unsigned long long path_index) {
    // splitmix64 finaliser over seed xor index
    unsigned long long z = (seed ^ path_index) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace drawdown
