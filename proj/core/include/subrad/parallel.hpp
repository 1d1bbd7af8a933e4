#pragma once

#include <cstddef>
#include <functional>

namespace subrad {

// Runs body(i) for i in [0, count) on up to `workers` threads. Workers pull
// indices from a shared counter, so results must be stored by index. The
// first exception thrown by any body is rethrown after all threads join.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace subrad
