#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace osa {

/// Runs fn(block, begin, end) for a fixed partition of [0, n_items) into
/// n_blocks contiguous blocks. The partition depends only on n_items and
/// n_blocks, never on the thread count, so callers that keep per-block
/// results and combine them in block order get bit-identical output for any
/// `threads` value. threads <= 1 runs inline.
inline void parallel_blocks(std::size_t n_items, std::size_t n_blocks, int threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n_items == 0) return;
    if (n_blocks == 0) n_blocks = 1;
    if (n_blocks > n_items) n_blocks = n_items;
    const std::size_t base = n_items / n_blocks;
    const std::size_t rem = n_items % n_blocks;

    auto block_bounds = [&](std::size_t b) {
        const std::size_t begin = b * base + std::min(b, rem);
        const std::size_t len = base + (b < rem ? 1 : 0);
        return std::pair<std::size_t, std::size_t>{begin, begin + len};
    };

    if (threads <= 1 || n_blocks == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            auto [lo, hi] = block_bounds(b);
            fn(b, lo, hi);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            auto [lo, hi] = block_bounds(b);
            fn(b, lo, hi);
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
    std::vector<std::thread> pool;
    pool.reserve(n_workers - 1);
    for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

inline int available_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace osa
