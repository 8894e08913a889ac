#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace loopcool {

// Applies fn to 0..count-1 on up to `workers` threads; out[i] = fn(i).
// The first exception thrown by any task is rethrown after all threads join.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, int workers, Fn fn) {
    std::vector<T> out(count);
    const std::size_t pool = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (pool <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(guard);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t k = 0; k < pool; ++k) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace loopcool
