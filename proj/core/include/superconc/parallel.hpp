#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace superconc {

/// Splits [0, count) into at most `jobs` contiguous chunks and runs
/// `body(begin, end)` on each. Chunk boundaries never affect results as long
/// as `body` writes only to the slots it owns.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
    if (count == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(jobs == 0 ? 1 : jobs, 1, count);
    if (workers == 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, w, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace superconc
