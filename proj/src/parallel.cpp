#include "asnm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace asnm {

namespace {
std::atomic<unsigned> g_jobs{1};
thread_local bool t_inside = false;
}  // namespace

void set_max_jobs(unsigned jobs) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    g_jobs = jobs;
}

unsigned max_jobs() { return g_jobs; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned jobs = g_jobs;
    // Nested calls run inline so the cap bounds the total thread count.
    if (jobs <= 1 || n <= 1 || t_inside) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        t_inside = true;
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
        t_inside = false;
    };
    const std::size_t count = std::min<std::size_t>(jobs, n);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace asnm
