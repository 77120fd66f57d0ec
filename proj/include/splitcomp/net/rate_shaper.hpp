// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace splitcomp::net {

/// Time source for the shaper; seconds on an arbitrary monotonic origin.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;
    virtual void sleep_for(double seconds) = 0;
};

class SteadyClock final : public Clock {
public:
    double now() override;
    void sleep_for(double seconds) override;
};

/// Advances only when slept on.
class ManualClock final : public Clock {
public:
    double now() override { return t_; }
    void sleep_for(double seconds) override {
        if (seconds > 0) t_ += seconds;
    }
    void advance(double seconds) { t_ += seconds; }

private:
    double t_ = 0;
};

/// Token bucket. Starts full; tokens are bits.
class RateShaper {
public:
    static constexpr double kDefaultCapacityBits = 256 * 8;

    RateShaper(double rate_bps, double capacity_bits = kDefaultCapacityBits, Clock* clock = nullptr);

    /// Blocks until `bytes` worth of tokens have been taken; returns the
    /// clock time at completion.
    double acquire(std::size_t bytes);

    double rate_bps() const noexcept { return rate_; }
    double capacity_bits() const noexcept { return capacity_; }
    double tokens() const noexcept { return tokens_; }
    Clock& clock() noexcept { return *clock_; }

private:
    void refill();

    double rate_;
    double capacity_;
    double tokens_;
    double last_;
    SteadyClock steady_;
    Clock* clock_;
};

}  // namespace splitcomp::net
