#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "errors.hpp"

namespace mesbo {

/// SplitMix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, Rest... rest) {
    return derive_seed(derive_seed(seed, stream), static_cast<std::uint64_t>(rest)...);
}

/// Seeded random stream. Every stochastic operation takes one of these explicitly;
/// parallel callers split with `child()` rather than sharing a stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    std::uint64_t next_u64() { return engine_(); }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    /// Independent stream keyed by `stream`; does not advance this one.
    Rng child(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

namespace detail {

inline std::vector<unsigned> first_primes(std::size_t n) {
    std::vector<unsigned> primes;
    for (unsigned c = 2; primes.size() < n; ++c) {
        bool is_prime = true;
        for (unsigned p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                is_prime = false;
                break;
            }
        }
        if (is_prime) primes.push_back(c);
    }
    return primes;
}

inline double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

}  // namespace detail

/// Randomly shifted Halton points in [0,1)^dim, one per row.
/// The shift (Cranley-Patterson rotation) and the skipped prefix come from `rng`,
/// so the set is a deterministic function of the stream state.
inline Eigen::MatrixXd shifted_halton(std::size_t n, std::size_t dim, Rng& rng) {
    if (dim == 0) throw ArgumentError("shifted_halton: dim must be >= 1");
    const auto primes = detail::first_primes(dim);
    Eigen::VectorXd shift(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) shift[static_cast<Eigen::Index>(j)] = rng.uniform();
    const std::uint64_t skip = 1 + rng.index(1024);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            double v = detail::radical_inverse(i + skip, primes[j]) + shift[static_cast<Eigen::Index>(j)];
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v - std::floor(v);
        }
    }
    return pts;
}

}  // namespace mesbo
