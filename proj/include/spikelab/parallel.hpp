#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace spikelab {

/// Worker cap for library loops. 0 restores the default: SPIKELAB_THREADS if set,
/// otherwise the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls body(i) for every i in [0, n) on up to thread_count() threads.
/// Work is handed out by index, so results stored per index do not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Sum of term(i) over [0, n) evaluated in fixed blocks and reduced in block order,
/// bit-identical for every thread count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace spikelab
