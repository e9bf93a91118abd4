#pragma once

#include <cstddef>
#include <functional>

namespace asnm {

/// Process-wide worker cap; 0 means hardware concurrency. Defaults to 1.
void set_max_jobs(unsigned jobs);
unsigned max_jobs();

/// Runs body(i) for i in [0, n). Work is split over at most max_jobs()
/// threads; callers write results into slot i so output order never depends
/// on scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace asnm
