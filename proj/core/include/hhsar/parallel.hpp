#pragma once

#include <cstddef>
#include <functional>

namespace hhsar {

/// Worker cap for data-parallel loops. Defaults to 1 (serial).
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls body(begin, end) over disjoint chunks covering [0, n). Chunks run on
/// up to thread_count() threads; the call returns after all chunks finish.
/// The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hhsar
