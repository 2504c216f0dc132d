#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mclab {

// Splits [0, count) into contiguous chunks and runs body(begin, end, chunk)
// on up to `jobs` threads. Chunk boundaries depend only on count and jobs, so
// callers that combine per-chunk results in chunk order stay deterministic.
// The first exception thrown by any chunk is rethrown on the caller.
template <class Body>
void parallel_chunks(std::size_t count, int jobs, Body&& body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count));
    if (workers <= 1) {
        body(std::size_t{0}, count, std::size_t{0});
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end, w] {
            try {
                body(begin, end, w);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mclab
