#include "splatlm/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace splatlm {

namespace {
std::atomic<int> g_threads{0};  // 0 = resolve from hardware
}

int thread_count() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return n;
}

void set_thread_count(int n) { g_threads.store(n, std::memory_order_relaxed); }

void parallel_chunks(std::size_t n, int chunks,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    chunks = std::max(1, std::min<int>(chunks, static_cast<int>(n)));

    auto run_chunk = [&](int c) {
        const std::size_t begin = n * static_cast<std::size_t>(c) / chunks;
        const std::size_t end = n * static_cast<std::size_t>(c + 1) / chunks;
        if (begin < end) fn(c, begin, end);
    };

    const int workers = std::min(thread_count(), chunks);
    if (workers <= 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) return;
            try {
                run_chunk(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    parallel_chunks(n, thread_count() * 4, [&](int, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    });
}

}  // namespace splatlm
