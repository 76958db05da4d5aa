#pragma once

namespace ganlab {

// Worker-thread cap: GANLAB_THREADS if set (>=1), else hardware concurrency.
int thread_cap();

// Installs the cap as the OpenMP thread count. Call once from each entry point.
void apply_thread_cap();

}  // namespace ganlab
