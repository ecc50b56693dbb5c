#pragma once

#include "epd/types.hpp"

#include <functional>

namespace epd {

/// Worker count from EPD_WORKERS; 1 when unset or invalid.
int worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write to
/// disjoint outputs, so results do not depend on the worker count.
void parallel_for(Index n, const std::function<void(Index, Index)>& body);

}  // namespace epd
