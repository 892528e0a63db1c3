#pragma once

#include <cstdint>
#include <string_view>

namespace hardhank {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based generator: every draw is a pure function of (key, counter), so
// streams can be partitioned by batch element or draw index without sharing
// state between threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed);

    // Derived independent streams.
    CounterRng substream(std::string_view name) const;
    CounterRng substream(std::uint64_t index) const;

    // Uniform on [0, 1).
    double uniform(std::uint64_t counter) const;
    // Standard normal (Box-Muller on counters 2c and 2c+1).
    double normal(std::uint64_t counter) const;

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

}  // namespace hardhank
