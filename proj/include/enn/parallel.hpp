#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace enn {

/// Runs fn(i) for i in [0, count) across `threads` workers on contiguous
/// index chunks. Each index owns its output slot, so results are identical
/// for any thread count; callers fold the slots in index order afterwards.
/// threads = 0 means hardware concurrency.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& fn) {
    if (count == 0) return;
    unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));

    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace enn
