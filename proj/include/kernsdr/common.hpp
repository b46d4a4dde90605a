#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kernsdr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

// =============================================================================
// Errors
// =============================================================================

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (shapes, ranges, file contents).
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A slice ended up with (near) zero estimated probability mass.
class SliceDegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The kernel-smoothed density at an evaluation point fell below its floor.
class LocalSupportError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Censoring calibration could not bracket or reach the requested rate.
class CalibrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// =============================================================================
// Warnings
// =============================================================================

namespace detail {
inline std::atomic<bool>& warnings_flag() {
    static std::atomic<bool> enabled{true};
    return enabled;
}
inline std::mutex& warnings_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

inline void set_warnings_enabled(bool on) { detail::warnings_flag() = on; }

inline void warn(const std::string& message) {
    if (!detail::warnings_flag()) return;
    std::lock_guard<std::mutex> lock(detail::warnings_mutex());
    std::cerr << "kernsdr: warning: " << message << '\n';
}

// =============================================================================
// Seeding
// =============================================================================

/// SplitMix64 finalizer; used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <class... Keys>
std::uint64_t derive_seed(std::uint64_t seed, Keys... keys) {
    std::uint64_t s = mix_seed(seed);
    ((s = mix_seed(s ^ static_cast<std::uint64_t>(keys))), ...);
    return s;
}

// =============================================================================
// Threads
// =============================================================================

/// Thread count from an explicit request, else KERNSDR_THREADS, else hardware.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KERNSDR_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; callers write results into per-index slots, so the
/// output does not depend on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline bool all_finite(const Eigen::Ref<const MatrixXd>& m) { return m.allFinite(); }

}  // namespace kernsdr
