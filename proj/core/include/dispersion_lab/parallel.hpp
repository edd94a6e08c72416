#pragma once

#include <cstddef>
#include <functional>

namespace dispersion_lab {

/// Worker count: DISPERSION_LAB_THREADS if set and positive, otherwise the
/// hardware concurrency. An explicit override (see ScopedWorkerCount) wins.
std::size_t worker_count();

/// Overrides the worker count for the lifetime of the object.
class ScopedWorkerCount {
public:
    explicit ScopedWorkerCount(std::size_t workers);
    ~ScopedWorkerCount();
    ScopedWorkerCount(const ScopedWorkerCount&) = delete;
    ScopedWorkerCount& operator=(const ScopedWorkerCount&) = delete;

private:
    std::size_t previous_;
};

/// Runs body(i) for i in [0, n). Each index is an independent unit writing its
/// own output slot, so results never depend on how indices map to workers.
/// The first exception thrown by any unit is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dispersion_lab
