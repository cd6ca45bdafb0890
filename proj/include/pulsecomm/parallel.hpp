// parallel.hpp
//  Bounded worker pool for independent sweep points.
#ifndef PULSECOMM_PARALLEL_HPP
#define PULSECOMM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pulsecomm
{

// Calls fn(i) for i in [0, n) on up to `jobs` threads (the caller included).
// The first exception thrown is rethrown after all workers have stopped.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                const std::lock_guard lock(error_mutex);
                if (!error)
                {
                    error = std::current_exception();
                }
                next = n;
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(jobs, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(threads, n); ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread &t : pool)
    {
        t.join();
    }
    if (error)
    {
        std::rethrow_exception(error);
    }
}

} // namespace pulsecomm

#endif
