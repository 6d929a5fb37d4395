#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace mbs {

/**
 * Counter-based 64-bit generator.
 *
 * Output i of a stream keyed by `seed` is splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15),
 * i.e. the SplitMix64 sequence. The whole state is (seed, counter), so a stream
 * can be recreated anywhere from its seed and no global randomness exists.
 * All sampling helpers below are implemented on top of next_u64() with explicit
 * arithmetic (no std:: distributions), so results are identical across
 * standard libraries.
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : seed_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept;

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Index drawn from an unnormalized non-negative weight vector.
    std::size_t categorical(std::span<const double> weights) noexcept;

    /// Standard exponential variate.
    double exponential() noexcept;

    /// Symmetric Dirichlet(1) sample of the given dimension.
    std::vector<double> dirichlet_ones(std::size_t dim);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// The SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and a list of labels (order matters).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels) noexcept;

/// FNV-1a hash of a string, used to turn identifiers into seed labels.
std::uint64_t hash_label(std::string_view label) noexcept;

}  // namespace mbs
