#include "hardhank/rng.hpp"

#include <cmath>
#include <numbers>

namespace hardhank {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

CounterRng CounterRng::substream(std::string_view name) const {
    // FNV-1a over the name, then mixed with the parent key.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    CounterRng child(0);
    child.key_ = splitmix64(key_ ^ splitmix64(h));
    return child;
}

CounterRng CounterRng::substream(std::uint64_t index) const {
    CounterRng child(0);
    child.key_ = splitmix64(splitmix64(key_ + 0x3c6ef372fe94f82bULL) ^ splitmix64(index));
    return child;
}

double CounterRng::uniform(std::uint64_t counter) const {
    const std::uint64_t bits = splitmix64(key_ ^ splitmix64(counter));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hardhank
