#pragma once

// Hash families, Reed-Solomon and CRT codes, and their composition into
// independent codes g = f o h that assign grid cells to sketch buckets.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "locsketch/rng.hpp"

namespace locsketch {

using Symbol = std::uint32_t;

/// Raw member of the affine family x -> (a*x + b) mod P. `a` may be zero here;
/// this is the family enumerated by the pairwise-independence checks.
std::uint64_t affine_hash(std::uint64_t a, std::uint64_t b, std::uint64_t prime, std::uint64_t x);

/// An invertible affine hash h(x) = (a*x + b) mod P with P prime and a != 0.
class HashParams {
public:
    /// Throws std::invalid_argument unless P is prime, 1 <= a < P, and b < P.
    static HashParams make(std::uint64_t a, std::uint64_t b, std::uint64_t prime);

    std::uint64_t a() const { return a_; }
    std::uint64_t b() const { return b_; }
    std::uint64_t prime() const { return prime_; }

    /// h^{-1}(y) = a^{-1} (y - b) mod P.
    std::uint64_t invert(std::uint64_t y) const;

private:
    HashParams(std::uint64_t a, std::uint64_t b, std::uint64_t prime, std::uint64_t a_inv)
        : a_(a), b_(b), prime_(prime), a_inv_(a_inv) {}
    std::uint64_t a_, b_, prime_, a_inv_;
};

/// Throws std::domain_error when x >= P.
std::uint64_t hash_eval(const HashParams& h, std::uint64_t x);

// ---------------------------------------------------------------------------
// Reed-Solomon over the prime field F_q, evaluated at the points 1..s.

struct RsCodeSpec {
    std::uint64_t q = 0;
    unsigned r = 0;
    unsigned s = 0;

    /// Throws std::invalid_argument unless q is prime, 1 <= r < s <= q and q^r fits in 64 bits.
    static RsCodeSpec make(std::uint64_t q, unsigned r, unsigned s);

    std::uint64_t message_space() const;  // q^r
    unsigned distance() const { return s - r; }
};

/// The base-q digits of x are the coefficients of a degree r-1 polynomial;
/// symbol i is its value at i+1. Throws std::domain_error when x >= q^r.
std::vector<Symbol> rs_encode(const RsCodeSpec& spec, std::uint64_t x);

/// Berlekamp-Welch unique decoding with floor((s-r)/2) error capacity.
std::optional<std::uint64_t> rs_decode(const RsCodeSpec& spec, std::span<const Symbol> word);

// ---------------------------------------------------------------------------
// Chinese remainder code: residues of x in [P] modulo pairwise-coprime moduli.

struct CrtCodeSpec {
    std::vector<std::uint64_t> moduli;
    std::uint64_t q = 0;  // nominal alphabet lower bound
    unsigned r = 0;       // any r residues determine x
    std::uint64_t prime = 0;  // message space is [prime]

    /// Throws std::invalid_argument unless the moduli are pairwise coprime,
    /// 1 <= r < s, and the product of the r smallest moduli is at least `prime`.
    static CrtCodeSpec make(std::vector<std::uint64_t> moduli, std::uint64_t q, unsigned r,
                            std::uint64_t prime);

    /// Smallest `count` pairwise-coprime integers in [q, 2q]: primes first in
    /// ascending order, then coprime composites. Throws if not enough exist.
    static std::vector<std::uint64_t> select_moduli(std::uint64_t q, unsigned count);

    unsigned s() const { return static_cast<unsigned>(moduli.size()); }
    unsigned distance() const { return s() - r; }
};

/// Throws std::domain_error when x >= P.
std::vector<Symbol> crt_encode(const CrtCodeSpec& spec, std::uint64_t x);

/// Subset vote: reconstruct from every r-subset and return the candidate in
/// [P] that agrees with more than s - (s-r)/2 positions.
std::optional<std::uint64_t> crt_decode(const CrtCodeSpec& spec, std::span<const Symbol> word);

// ---------------------------------------------------------------------------

enum class CodeKind { ReedSolomon, Crt };

std::string to_string(CodeKind kind);
/// Accepts "rs" / "crt" (case-insensitive). Throws std::invalid_argument otherwise.
CodeKind parse_code_kind(const std::string& text);

/// A codeword with optional erasures; nullopt marks an erased position.
struct Codeword {
    std::vector<std::optional<Symbol>> symbols;

    std::size_t erasures() const;
};

/// A sampled member of f o H_P: cells [N] -> B_1 x ... x B_s.
class IndependentCode {
public:
    using Inner = std::variant<RsCodeSpec, CrtCodeSpec>;

    /// Throws std::invalid_argument when P < N, when the hash modulus differs
    /// from the inner code's message prime, or when the hash domain exceeds the
    /// inner message space.
    IndependentCode(Inner inner, HashParams hash, std::uint64_t domain_size);

    const Inner& inner() const { return inner_; }
    const HashParams& hash() const { return hash_; }
    CodeKind kind() const;
    std::uint64_t domain_size() const { return domain_size_; }
    unsigned s() const;
    unsigned r() const;
    std::uint64_t q() const;
    unsigned distance() const { return s() - r(); }
    const std::vector<std::uint64_t>& alphabet_sizes() const { return alphabet_sizes_; }

    /// g(cell) = f(h(cell)). Throws std::domain_error when cell >= N.
    std::vector<Symbol> encode(std::uint64_t cell) const;

    /// Erasures become symbol 0, then inner decode, then hash inversion.
    /// Returns the preimage in [P]; callers check it against N.
    std::optional<std::uint64_t> decode(const Codeword& word) const;

private:
    Inner inner_;
    HashParams hash_;
    std::uint64_t domain_size_;
    std::vector<std::uint64_t> alphabet_sizes_;
};

/// Smallest prime in [max(ceil(q^r / 2), N), q^r]. Throws std::invalid_argument
/// when 2N >= q^r or no such prime exists.
std::uint64_t select_code_prime(std::uint64_t domain_size, std::uint64_t q, unsigned r);

/// Sample g = f o h with a uniform in [1, P-1] and b uniform in [0, P-1].
IndependentCode sample_independent_code(CodeKind kind, std::uint64_t domain_size, unsigned s,
                                        std::uint64_t q, unsigned r, Rng& rng);

/// |{(a, i) : a in S, exists a' in S' with a' != a and g_i(a) = g_i(a')}|.
std::size_t count_colliding_symbols(const IndependentCode& code, std::span<const std::uint64_t> S,
                                    std::span<const std::uint64_t> S_prime);

/// Key-value view of a code's sampling parameters (kind, N, s, q, r, seed).
struct CodeParams {
    CodeKind kind = CodeKind::Crt;
    std::uint64_t domain_size = 0;
    unsigned s = 0;
    std::uint64_t q = 0;
    unsigned r = 0;
    std::uint64_t seed = 0;

    std::map<std::string, std::string> to_config() const;
    /// Throws std::invalid_argument naming the first missing or malformed key.
    static CodeParams from_config(const std::map<std::string, std::string>& section);

    IndependentCode sample() const;
};

}  // namespace locsketch
