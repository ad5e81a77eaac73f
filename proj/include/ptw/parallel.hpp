#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace ptw {

// Worker count for parallel_for; 0 means hardware concurrency.
void set_thread_count(int k);
int thread_count();

// Runs f(i) for i in [0, count). Each index is independent, so results written by index
// are identical for every thread count. The first exception is rethrown.
template <typename F>
void parallel_for(int count, F&& f)
{
    int k = std::min(thread_count(), count);
    if (k <= 1) {
        for (int i = 0; i < count; ++i)
            f(i);
        return;
    }
    std::vector<std::exception_ptr> errs(k);
    std::vector<std::thread> pool;
    for (int t = 0; t < k; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < count; i += k)
                    f(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errs)
        if (e)
            std::rethrow_exception(e);
}

} // namespace ptw
