#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <vector>

#include "fastlik/summation.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fastlik {

// Fixed chunk length for data-parallel reductions. Chunk boundaries depend only on the
// problem size, so partial results and their in-order fold are identical for any thread
// count.
inline constexpr std::size_t kReductionChunk = 8192;

inline int max_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_workers(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kReductionChunk) {
    return (n + chunk - 1) / chunk;
}

// Runs body(chunk_index, begin, end) for every fixed chunk of [0, n) in parallel.
// An exception thrown by a chunk is rethrown on the calling thread; when several chunks
// fail, the one with the lowest index wins.
template <class Body>
void for_each_chunk(std::size_t n, Body&& body, std::size_t chunk = kReductionChunk) {
    const std::size_t nchunks = chunk_count(n, chunk);
    std::vector<std::exception_ptr> errors(nchunks);
    const auto nc = static_cast<long long>(nchunks);
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < nc; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const std::size_t begin = ci * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        try {
            body(ci, begin, end);
        } catch (...) {
            errors[ci] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Sums body(begin, end) over fixed chunks of [0, n). Chunks run in parallel; partials
// are folded serially in chunk order with compensation.
template <class Body>
double chunked_sum(std::size_t n, Body&& body, std::size_t chunk = kReductionChunk) {
    std::vector<double> partial(chunk_count(n, chunk), 0.0);
    for_each_chunk(
        n, [&](std::size_t c, std::size_t begin, std::size_t end) { partial[c] = body(begin, end); },
        chunk);
    CompensatedSum total;
    for (double p : partial) total += p;
    return total.value();
}

}  // namespace fastlik
