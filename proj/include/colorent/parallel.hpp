#pragma once

#include <cstddef>
#include <functional>

namespace colorent {

/// Worker threads to use: COLORENT_WORKERS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Run task(i) for every i in [0, tasks) on up to worker_count() threads.
/// Tasks must write only to their own slots; the first exception is rethrown.
void parallel_for(std::size_t tasks, const std::function<void(std::size_t)>& task);

}  // namespace colorent
