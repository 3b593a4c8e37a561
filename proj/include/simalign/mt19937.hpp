#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace simalign {

// 32-bit Mersenne Twister with the reference init_genrand / init_by_array
// seeding routines (std::mt19937 only offers seed_seq, which produces a
// different state for the same key).
class Mt19937 {
public:
    static constexpr std::size_t kStateSize = 624;

    explicit Mt19937(std::uint32_t seed = 5489u) { seed_scalar(seed); }
    explicit Mt19937(std::span<const std::uint32_t> key) { seed_array(key); }

    void seed_scalar(std::uint32_t seed);
    void seed_array(std::span<const std::uint32_t> key);

    std::uint32_t next();

    // Uniform integer in [0, bound) without modulo bias. bound must be > 0.
    std::uint32_t below(std::uint32_t bound);

    friend bool operator==(const Mt19937&, const Mt19937&) = default;

private:
    void twist();

    std::array<std::uint32_t, kStateSize> state_{};
    std::size_t index_ = kStateSize;
};

}  // namespace simalign
