#pragma once

#include <functional>

#include "msfem/types.hpp"

namespace msfem {

// Worker count from MSFEM_WORKERS if set, else the fallback.
int resolve_workers(int fallback);

// Runs body(i) for i in [0, n). The first exception thrown by any worker is
// rethrown after all workers stop.
void parallel_for(Index n, int workers, const std::function<void(Index)>& body);

}  // namespace msfem
