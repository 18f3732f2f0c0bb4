// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace acpt {

// Error taxonomy. The CLI maps these onto exit codes: parse/validation/
// schema/compatibility/integrity/data-gap -> 2, numeric -> 3.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataGapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CompatibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic parallel_for.
//
// Work is split into contiguous index chunks. Every chunk writes only its own
// output slots and every per-slot reduction runs in a fixed sequential order,
// so results are bit-identical for any thread count, including 1.
// ---------------------------------------------------------------------------

namespace detail {

inline thread_local bool tls_in_worker = false;

class Pool {
public:
    static Pool& get() {
        static Pool pool;
        return pool;
    }

    void resize(unsigned workers) {
        std::unique_lock lk(mu_);
        shutdown_locked(lk);
        spawn_locked(workers);
    }

    // Runs fn(chunk) for chunk in [0, chunks). The caller participates.
    void run(std::size_t chunks, const std::function<void(std::size_t)>& fn) {
        std::unique_lock lk(mu_);
        fn_ = &fn;
        total_ = chunks;
        next_.store(0, std::memory_order_relaxed);
        done_.store(0, std::memory_order_relaxed);
        ++generation_;
        lk.unlock();
        cv_.notify_all();

        // The caller participates; nested parallel_for calls made from chunk
        // bodies serialize (run() is not reentrant).
        const bool saved = tls_in_worker;
        tls_in_worker = true;
        work();
        tls_in_worker = saved;

        std::unique_lock lk2(mu_);
        done_cv_.wait(lk2, [&] { return done_.load(std::memory_order_acquire) == total_; });
        fn_ = nullptr;
    }

    unsigned workers() const { return static_cast<unsigned>(threads_.size()); }

    ~Pool() {
        std::unique_lock lk(mu_);
        shutdown_locked(lk);
    }

private:
    Pool() = default;

    void spawn_locked(unsigned workers) {
        stop_ = false;
        for (unsigned i = 0; i < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    void shutdown_locked(std::unique_lock<std::mutex>& lk) {
        stop_ = true;
        ++generation_;
        lk.unlock();
        cv_.notify_all();
        for (auto& t : threads_) t.join();
        threads_.clear();
        lk.lock();
    }

    void worker_loop() {
        tls_in_worker = true;
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
            seen = generation_;
            if (stop_) return;
            const auto* fn = fn_;
            lk.unlock();
            if (fn) work_on(*fn);
        }
    }

    void work() {
        std::unique_lock lk(mu_);
        const auto* fn = fn_;
        lk.unlock();
        if (fn) work_on(*fn);
    }

    void work_on(const std::function<void(std::size_t)>& fn) {
        for (;;) {
            std::size_t c = next_.fetch_add(1, std::memory_order_relaxed);
            if (c >= total_) break;
            fn(c);
            if (done_.fetch_add(1, std::memory_order_acq_rel) + 1 == total_) {
                done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::size_t)>* fn_ = nullptr;
    std::size_t total_ = 0;
    std::atomic<std::size_t> next_{0}, done_{0};
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

inline unsigned& thread_count_ref() {
    static unsigned n = [] {
        unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1u : hc;
    }();
    return n;
}

} // namespace detail

inline unsigned thread_count() { return detail::thread_count_ref(); }

// n == 0 restores the hardware default.
inline void set_thread_count(unsigned n) {
    if (n == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        n = hc == 0 ? 1u : hc;
    }
    detail::thread_count_ref() = n;
    detail::Pool::get().resize(n > 0 ? n - 1 : 0);
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
    if (n == 0) return;
    const unsigned tc = thread_count();
    std::size_t chunks = std::min<std::size_t>(tc, n);
    if (chunks <= 1 || detail::tls_in_worker) {
        body(std::size_t{0}, n);
        return;
    }
    std::function<void(std::size_t)> fn = [&](std::size_t c) {
        body(n * c / chunks, n * (c + 1) / chunks);
    };
    detail::Pool::get().run(chunks, fn);
}

} // namespace acpt
