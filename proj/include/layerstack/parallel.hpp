#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace layerstack {

/// Worker count: hardware concurrency capped by the LAYERSTACK_THREADS
/// environment variable (values < 1 mean serial).
inline int worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("LAYERSTACK_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return std::max(1, n);
}

/// Static block partition of [0, count). Each worker owns a contiguous range,
/// so writes to disjoint slots are race-free and results do not depend on the
/// worker count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    int workers = worker_count();
    if (workers <= 1 || count < 2048) {
        body(0, count);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    std::size_t chunk = (count + w - 1) / w;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k) {
        std::size_t lo = k * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

/// Same partition, with the worker slot passed so each range can write its
/// own reduction cell. Slots are in [0, worker_count()).
inline void parallel_for(std::size_t count,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    int workers = worker_count();
    if (workers <= 1 || count < 2048) {
        body(0, count, 0);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    std::size_t chunk = (count + w - 1) / w;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k) {
        std::size_t lo = k * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi, k] { body(lo, hi, k); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace layerstack
