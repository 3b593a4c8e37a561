#include "simalign/mt19937.hpp"

#include <algorithm>

namespace simalign {

namespace {
constexpr std::size_t kShift = 397;
constexpr std::uint32_t kMatrixA = 0x9908b0dfu;
constexpr std::uint32_t kUpperMask = 0x80000000u;
constexpr std::uint32_t kLowerMask = 0x7fffffffu;
}  // namespace

void Mt19937::seed_scalar(std::uint32_t seed) {
    state_[0] = seed;
    for (std::size_t i = 1; i < kStateSize; ++i) {
        state_[i] = 1812433253u * (state_[i - 1] ^ (state_[i - 1] >> 30)) + static_cast<std::uint32_t>(i);
    }
    index_ = kStateSize;
}

void Mt19937::seed_array(std::span<const std::uint32_t> key) {
    seed_scalar(19650218u);
    std::size_t i = 1;
    std::size_t j = 0;
    const std::size_t len = key.size();
    for (std::size_t k = std::max(kStateSize, len); k > 0; --k) {
        state_[i] = (state_[i] ^ ((state_[i - 1] ^ (state_[i - 1] >> 30)) * 1664525u)) + key[j] +
                    static_cast<std::uint32_t>(j);
        ++i;
        ++j;
        if (i >= kStateSize) {
            state_[0] = state_[kStateSize - 1];
            i = 1;
        }
        if (j >= len) j = 0;
    }
    for (std::size_t k = kStateSize - 1; k > 0; --k) {
        state_[i] = (state_[i] ^ ((state_[i - 1] ^ (state_[i - 1] >> 30)) * 1566083941u)) -
                    static_cast<std::uint32_t>(i);
        ++i;
        if (i >= kStateSize) {
            state_[0] = state_[kStateSize - 1];
            i = 1;
        }
    }
    state_[0] = 0x80000000u;
    index_ = kStateSize;
}

void Mt19937::twist() {
    for (std::size_t k = 0; k < kStateSize; ++k) {
        const std::uint32_t y = (state_[k] & kUpperMask) | (state_[(k + 1) % kStateSize] & kLowerMask);
        state_[k] = state_[(k + kShift) % kStateSize] ^ (y >> 1) ^ ((y & 1u) ? kMatrixA : 0u);
    }
    index_ = 0;
}

std::uint32_t Mt19937::next() {
    if (index_ >= kStateSize) twist();
    std::uint32_t y = state_[index_++];
    y ^= y >> 11;
    y ^= (y << 7) & 0x9d2c5680u;
    y ^= (y << 15) & 0xefc60000u;
    y ^= y >> 18;
    return y;
}

std::uint32_t Mt19937::below(std::uint32_t bound) {
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
    for (;;) {
        const std::uint32_t r = next();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace simalign
