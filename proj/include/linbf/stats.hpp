#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace linbf {

// Streaming summary of nonnegative integer observations (flip counts).
// Accumulators are exact integers, so merge() is exactly associative and
// order-independent: the same replicates produce the same stats no matter
// how they were partitioned across threads.
class FlipStats {
public:
    void add(std::uint64_t v) {
        ++count_;
        sum_ += v;
        sum_sq_ += static_cast<unsigned __int128>(v) * v;
        max_ = std::max(max_, v);
    }

    void merge(const FlipStats& o) {
        count_ += o.count_;
        sum_ += o.sum_;
        sum_sq_ += o.sum_sq_;
        max_ = std::max(max_, o.max_);
    }

    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t max() const noexcept { return max_; }
    std::uint64_t sum() const noexcept { return sum_; }
    double sum_sq() const noexcept { return static_cast<double>(sum_sq_); }

    double mean() const {
        return count_ == 0 ? 0.0 : static_cast<double>(sum_) / static_cast<double>(count_);
    }

    // Sample standard deviation (n-1 denominator); 0 for fewer than 2 points.
    double sd() const {
        if (count_ < 2) return 0.0;
        const long double n = static_cast<long double>(count_);
        const long double s = static_cast<long double>(sum_);
        const long double var =
            (static_cast<long double>(sum_sq_) - s * s / n) / (n - 1.0L);
        return var <= 0.0L ? 0.0 : static_cast<double>(std::sqrt(static_cast<double>(var)));
    }

    // Standard error of the mean.
    double se() const { return count_ == 0 ? 0.0 : sd() / std::sqrt(static_cast<double>(count_)); }

private:
    std::uint64_t count_ = 0;
    std::uint64_t max_ = 0;
    std::uint64_t sum_ = 0;
    unsigned __int128 sum_sq_ = 0;
};

} // namespace linbf
