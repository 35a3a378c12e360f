#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace thoughtcards {

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads. `fn` must
/// not throw; callers catch per item and record the outcome.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
}

}  // namespace thoughtcards
