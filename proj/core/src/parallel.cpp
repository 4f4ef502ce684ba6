#include "aclab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace aclab {

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_kernel_workers(unsigned n) { g_workers = n; }

unsigned kernel_workers() {
    const unsigned n = g_workers.load();
    if (n > 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_rows(std::size_t rows, const std::function<void(std::size_t)>& body) {
    const std::size_t w = std::min<std::size_t>(kernel_workers(), rows);
    if (w <= 1) {
        for (std::size_t j = 0; j < rows; ++j) body(j);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t lo = rows * t / w;
        const std::size_t hi = rows * (t + 1) / w;
        pool.emplace_back([&body, lo, hi] {
            for (std::size_t j = lo; j < hi; ++j) body(j);
        });
    }
    for (auto& th : pool) th.join();
}

double parallel_row_sum(std::size_t rows, const std::function<double(std::size_t)>& row) {
    std::vector<double> partial(rows, 0.0);
    parallel_rows(rows, [&](std::size_t j) { partial[j] = row(j); });
    double s = 0.0;
    for (double x : partial) s += x;
    return s;
}

}  // namespace aclab
