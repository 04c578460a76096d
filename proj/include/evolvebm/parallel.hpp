#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace evolvebm {

// Runs fn(lo, hi) over fixed-size chunks of [0, n_items). The chunk layout
// depends only on chunk_size, never on n_threads, so per-chunk results can be
// reduced in chunk order afterwards and the outcome is identical for any
// worker count.
inline void parallel_chunks(std::size_t n_items, std::size_t chunk_size, unsigned n_threads,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n_items == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    if (n_threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const std::size_t lo = c * chunk_size;
            fn(lo, std::min(lo + chunk_size, n_items));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            const std::size_t lo = c * chunk_size;
            fn(lo, std::min(lo + chunk_size, n_items));
        }
    };
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(n_threads, static_cast<unsigned>(n_chunks));
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

inline constexpr std::size_t kDefaultChunk = 256;

}  // namespace evolvebm
