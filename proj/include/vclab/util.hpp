#pragma once

#include <cstdint>
#include <functional>

namespace vclab {

// global worker cap for ensemble loops; results never depend on it
void set_thread_cap(int n);
int thread_cap();

// chunked parallel loop over [0, n); body must write disjoint state
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body);

}  // namespace vclab
