#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace degreelab {

/// Worker cap for parallel loops. Initialized from DEGREELAB_THREADS, falling
/// back to the hardware concurrency. Results never depend on this value.
int thread_count();
void set_thread_count(int n);

/// Runs task(0) ... task(n_tasks - 1) on up to thread_count() workers.
/// Tasks must write only to their own output slots. If tasks throw, the
/// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& task);

/// Pairwise (binary tree) sum in index order; the tree shape depends only on
/// values.size().
double pairwise_sum(std::span<const double> values);

}  // namespace degreelab
