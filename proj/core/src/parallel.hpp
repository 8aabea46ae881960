#pragma once

#include <functional>

namespace dofw::detail {

/// Worker count from DOFW_THREADS, else hardware concurrency (at least 1).
int thread_count();

/// Calls body(k) for k in [0, count); each index runs exactly once. Results
/// must not depend on which thread handles which index.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace dofw::detail
