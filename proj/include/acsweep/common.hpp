#ifndef ACSWEEP_COMMON_HPP
#define ACSWEEP_COMMON_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace acsweep {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// Static row partition. Work is split into contiguous index blocks, one
// block per worker, so results that are accumulated per index and then
// combined in index order do not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t nthreads = hw ? hw : 1;
    if (nthreads > n) nthreads = n ? n : 1;
    if (nthreads <= 1 || n < 4096) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Deterministic parallel reduction: indices are grouped into fixed-size
// blocks, each block is summed in index order, and block partials are
// combined in block order. The result is independent of the thread count.
inline double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    if (n == 0) return 0.0;
    constexpr std::size_t kBlock = 16384;
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t blo, std::size_t bhi) {
        for (std::size_t b = blo; b < bhi; ++b) {
            std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += term(i);
            partial[b] = s;
        }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

inline double sqr(double x) { return x * x; }

inline double smoothstep01(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * (3.0 - 2.0 * x);
}

// abs(log(eps)); profiles use Lambda = 3|log eps| throughout.
inline double log_abs(double eps) { return std::fabs(std::log(eps)); }

}  // namespace acsweep

#endif
