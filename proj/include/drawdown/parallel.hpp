#pragma once

namespace drawdown {

/// Worker count for path-parallel kernels: the OpenMP default, capped by
/// DRAWDOWN_THREADS when that variable holds a positive integer. 1 without OpenMP.
int worker_threads();

/// Deterministic per-path seed derived from the ensemble seed and path index.
unsigned long long path_seed(unsigned long long seed, unsigned long long path_index);

}  // namespace drawdown
