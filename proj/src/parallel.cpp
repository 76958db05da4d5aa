#include "ganlab/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace ganlab {

int thread_cap() {
    static int cap = [] {
        if (const char* env = std::getenv("GANLAB_THREADS")) {
            try {
                int n = std::stoi(env);
                if (n >= 1) return n;
            } catch (...) {
            }
        }
        return omp_get_max_threads();
    }();
    return cap;
}

void apply_thread_cap() {
    omp_set_num_threads(thread_cap());
}

}  // namespace ganlab
