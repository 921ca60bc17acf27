#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace locsketch {

/// Modular arithmetic helpers over 64-bit operands. Products go through
/// 128-bit intermediates, so any modulus below 2^63 is safe.

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

/// Multiplicative inverse of a modulo m, or nullopt when gcd(a, m) != 1.
std::optional<std::uint64_t> invmod(std::uint64_t a, std::uint64_t m);

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);

/// Smallest prime >= n, or nullopt if none exists at or below `limit`.
std::optional<std::uint64_t> next_prime(std::uint64_t n, std::uint64_t limit);

/// Integer power with overflow detection; nullopt when the result exceeds 2^64-1.
std::optional<std::uint64_t> checked_pow(std::uint64_t base, unsigned exp);

/// A residue `value` modulo `modulus`.
struct Residue {
    std::uint64_t value;
    std::uint64_t modulus;
};

/// The unique x in [0, prod moduli) congruent to every residue.
/// Throws std::invalid_argument if two moduli share a factor, a modulus is
/// zero, or the product overflows 64 bits.
std::uint64_t crt_reconstruct(std::span<const Residue> residues);

}  // namespace locsketch
