#include "spikelab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

namespace spikelab {

namespace {

std::atomic<unsigned> g_threads{0};

unsigned default_threads() {
    if (const char* env = std::getenv("SPIKELAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

thread_local bool t_inside_worker = false;

}  // namespace

void set_thread_count(unsigned n) { g_threads = n; }

unsigned thread_count() {
    const unsigned n = g_threads.load();
    return n > 0 ? n : default_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    // nested loops run inline to avoid oversubscription
    if (workers <= 1 || t_inside_worker) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        t_inside_worker = true;
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
        t_inside_worker = false;
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    constexpr std::size_t kBlocks = 64;
    const std::size_t blocks = std::min(kBlocks, std::max<std::size_t>(n, 1));
    std::vector<double> partial(blocks, 0.0);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
        double s = 0.0, comp = 0.0;  // compensated within the block
        for (std::size_t i = lo; i < hi; ++i) {
            const double y = term(i) - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        partial[b] = s;
    });
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace spikelab
