#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ffou {

// Independent stream families derived from one master seed.
enum class StreamKind : std::uint64_t {
    noise = 1,
    forcing = 2,
    oracle = 3,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double to_open_unit(std::uint64_t bits) {
    // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace detail

// Counter-based generator: the draw at `index` is a pure function of
// (seed, kind, path, index). Generation order and thread layout never matter.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, StreamKind kind, std::uint64_t path)
        : key_(detail::splitmix64(detail::splitmix64(seed ^ (static_cast<std::uint64_t>(kind) << 56)) ^
                                  detail::splitmix64(path + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t bits(std::uint64_t index) const {
        return detail::splitmix64(key_ ^ detail::splitmix64(index * 0xd1b54a32d192ed03ULL + 1));
    }

    double uniform(std::uint64_t index) const { return detail::to_open_unit(bits(index)); }

    // Box-Muller on the pair (2j, 2j+1); even and odd indices use cos and sin.
    double normal(std::uint64_t index) const {
        const std::uint64_t pair = index >> 1;
        const double u1 = uniform(2 * pair);
        const double u2 = uniform(2 * pair + 1);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
    }

  private:
    std::uint64_t key_;
};

// Sequential cursor over a CounterRng, for consumers that only need "next draw".
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, StreamKind kind, std::uint64_t path) : rng_(seed, kind, path) {}
    explicit RandomStream(CounterRng rng) : rng_(rng) {}

    double uniform() { return rng_.uniform(counter_++); }
    double normal() {
        // Keep normals on their own even/odd lattice so pairs are not split.
        if (counter_ & 1) ++counter_;
        const double z = rng_.normal(counter_);
        counter_ += 2;
        return z;
    }
    double exponential() { return -std::log(uniform()); }

    std::uint64_t position() const { return counter_; }

  private:
    CounterRng rng_;
    std::uint64_t counter_ = 0;
};

} // namespace ffou
