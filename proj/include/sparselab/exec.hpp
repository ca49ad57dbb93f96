#pragma once

namespace sparselab {

/// Selects between the OpenMP kernels and the serial reference paths that
/// are kept for cross-checking.
enum class Exec { Serial, Parallel };

/// Thread count used by the parallel kernels (wraps omp_set_num_threads).
void set_jobs(int jobs);
int jobs();

}  // namespace sparselab
