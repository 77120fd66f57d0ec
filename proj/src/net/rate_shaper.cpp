// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/net/rate_shaper.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "splitcomp/error.hpp"

namespace splitcomp::net {

double SteadyClock::now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SteadyClock::sleep_for(double seconds) {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

RateShaper::RateShaper(double rate_bps, double capacity_bits, Clock* clock)
    : rate_(rate_bps), capacity_(capacity_bits), tokens_(capacity_bits), clock_(clock ? clock : &steady_) {
    if (!(rate_bps > 0)) throw ParameterError("shaper: rate must be positive");
    if (!(capacity_bits >= 8)) throw ParameterError("shaper: bucket must hold at least one byte");
    last_ = clock_->now();
}

void RateShaper::refill() {
    const double t = clock_->now();
    tokens_ = std::min(capacity_, tokens_ + (t - last_) * rate_);
    last_ = t;
}

double RateShaper::acquire(std::size_t bytes) {
    double need = 8.0 * static_cast<double>(bytes);
    while (need > 0) {
        refill();
        const double take = std::min(need, capacity_);
        // Tolerance: after sleeping exactly the deficit, rounding can leave
        // the bucket a few ulps short.
        if (tokens_ >= take - 1e-6) {
            tokens_ = std::max(0.0, tokens_ - take);
            need -= take;
        } else {
            clock_->sleep_for((take - tokens_) / rate_);
        }
    }
    return clock_->now();
}

}  // namespace splitcomp::net
