#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hfscat {

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
/// thread, so every index is processed exactly once and in a fixed block.
/// Values computed per index must not depend on the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         int threads = 0) {
    std::size_t hw = threads > 0 ? static_cast<std::size_t>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
    if (hw <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t nthreads = std::min(hw, n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Neumaier compensated accumulator; summation order is fixed by the caller,
/// so totals are bit-stable regardless of the thread count.
template <typename T>
class CompensatedSum {
public:
    void add(T value) {
        T t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value))
            comp_ += (sum_ - t) + value;
        else
            comp_ += (value - t) + sum_;
        sum_ = t;
    }
    T value() const { return sum_ + comp_; }

private:
    T sum_{};
    T comp_{};
};

template <typename T>
class CompensatedSum<std::complex<T>> {
public:
    void add(const std::complex<T>& value) {
        re_.add(value.real());
        im_.add(value.imag());
    }
    std::complex<T> value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum<T> re_;
    CompensatedSum<T> im_;
};

} // namespace hfscat
