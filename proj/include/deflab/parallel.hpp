#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace deflab {

/// DEFLAB_THREADS if set to a positive integer, else the logical core count.
inline std::size_t default_threads()
{
    if (const char* env = std::getenv("DEFLAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) {
                return static_cast<std::size_t>(v);
            }
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0), ..., f(count - 1) on up to `threads` workers and returns the
/// results in index order. The first exception thrown by any task is rethrown.
template <class F>
auto parallel_map(std::size_t count, F&& f, std::size_t threads = 0)
    -> std::vector<std::invoke_result_t<F&, std::size_t>>
{
    using R = std::invoke_result_t<F&, std::size_t>;
    if (threads == 0) {
        threads = default_threads();
    }
    threads = std::min(threads, count);
    std::vector<std::optional<R>> slots(count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            slots[i].emplace(f(i));
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    slots[i].emplace(f(i));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next.store(count);
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

} // namespace deflab
