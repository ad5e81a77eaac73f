#include "ptw/parallel.hpp"

#include <atomic>

namespace ptw {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int k)
{
    if (k <= 0)
        k = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    g_threads = k;
}

int thread_count() { return g_threads; }

} // namespace ptw
