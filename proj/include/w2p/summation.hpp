#ifndef W2P_SUMMATION_HPP
#define W2P_SUMMATION_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace w2p {

// Neumaier compensated summation.
struct Compensated {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct CompensatedC {
    Compensated re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

// Chunk size is fixed so that results do not depend on the number of workers.
inline constexpr std::size_t kChunk = 2048;

inline int& thread_setting() {
    static int n = 0;
    return n;
}

inline void set_threads(int n) { thread_setting() = n; }

inline bool& inside_worker() {
    thread_local bool flag = false;
    return flag;
}

inline int worker_count() {
    if (inside_worker()) return 1;
    int n = thread_setting();
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return n;
}

// Calls fn(chunk, begin, end) for every chunk of [0, n). Chunks are claimed dynamically,
// but each chunk's work only depends on its index.
inline std::size_t for_each_chunk(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                                  std::size_t chunk = kChunk) {
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(worker_count()), nchunks));
    auto body = [&](std::size_t c) { fn(c, c * chunk, std::min(n, (c + 1) * chunk)); };
    if (workers <= 1) {
        for (std::size_t c = 0; c < nchunks; ++c) body(c);
        return nchunks;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            inside_worker() = true;
            for (std::size_t c = next++; c < nchunks; c = next++) body(c);
        });
    }
    for (auto& t : pool) t.join();
    return nchunks;
}

// Independent work items with results stored by index.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    for_each_chunk(n, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) fn(k);
    }, 1);
}

}  // namespace w2p

#endif
