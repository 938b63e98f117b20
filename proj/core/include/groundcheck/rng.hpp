// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace groundcheck {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Portable seeded generator: std::mt19937_64 (bit-exact by the standard)
/// plus hand-written bounded draws, since <random> distributions differ
/// between standard libraries.
///
/// Streams: stream(seed, id, purpose) seeds the engine with
///   splitmix64(splitmix64(seed) ^ splitmix64(id * 0x9E3779B97F4A7C15 + purpose))
/// so each (record, purpose) pair draws from its own sequence regardless of
/// how many values other records consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    static Rng stream(std::uint64_t seed, std::uint64_t id, std::uint64_t purpose);

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, bound). Unbiased (rejection sampling). `bound` must be > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform double in [0, 1) with 53 random bits.
    double unit();
    /// Always consumes exactly one draw.
    bool bernoulli(double p);

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(below(items.size()))];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace groundcheck
