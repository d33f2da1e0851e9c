#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aqlock {

/// Runs body(i) for i in [0, n). jobs <= 1 is the serial reference path;
/// otherwise iterations are spread over an OpenMP team of `jobs` threads.
/// Callers must make body(i) write only to slot i so the result does not
/// depend on scheduling. The first exception thrown (lowest index) is
/// rethrown after the loop.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first;
    std::size_t first_index = n;
    std::mutex guard;
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(guard);
            if (i < first_index) {
                first_index = i;
                first = std::current_exception();
            }
        }
    }
    if (first) std::rethrow_exception(first);
}

}  // namespace aqlock
