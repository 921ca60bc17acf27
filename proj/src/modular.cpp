#include "locsketch/modular.hpp"

#include <array>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace locsketch {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1U) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1U;
    }
    return result;
}

std::optional<std::uint64_t> invmod(std::uint64_t a, std::uint64_t m) {
    if (m == 0) return std::nullopt;
    __int128 old_r = static_cast<__int128>(a % m), r = m;
    __int128 old_s = 1, s = 0;
    while (r != 0) {
        const __int128 quot = old_r / r;
        std::tie(old_r, r) = std::pair{r, old_r - quot * r};
        std::tie(old_s, s) = std::pair{s, old_s - quot * s};
    }
    if (old_r != 1) {
        if (m == 1) return 0;
        return std::nullopt;
    }
    __int128 inv = old_s % static_cast<__int128>(m);
    if (inv < 0) inv += m;
    return static_cast<std::uint64_t>(inv);
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    constexpr std::array<std::uint64_t, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (std::uint64_t p : bases) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    unsigned twos = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++twos;
    }
    for (std::uint64_t a : bases) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < twos; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::optional<std::uint64_t> next_prime(std::uint64_t n, std::uint64_t limit) {
    for (std::uint64_t c = n; c <= limit; ++c) {
        if (is_prime(c)) return c;
        if (c == UINT64_MAX) break;
    }
    return std::nullopt;
}

std::optional<std::uint64_t> checked_pow(std::uint64_t base, unsigned exp) {
    unsigned __int128 acc = 1;
    for (unsigned i = 0; i < exp; ++i) {
        acc *= base;
        if (acc > UINT64_MAX) return std::nullopt;
    }
    return static_cast<std::uint64_t>(acc);
}

std::uint64_t crt_reconstruct(std::span<const Residue> residues) {
    std::uint64_t x = 0;
    std::uint64_t modulus = 1;
    for (const auto& [value, m] : residues) {
        if (m == 0) throw std::invalid_argument("crt_reconstruct: zero modulus");
        if (std::gcd(modulus, m) != 1) {
            throw std::invalid_argument("crt_reconstruct: moduli not pairwise coprime (" +
                                        std::to_string(m) + ")");
        }
        const unsigned __int128 next = static_cast<unsigned __int128>(modulus) * m;
        if (next > UINT64_MAX) throw std::invalid_argument("crt_reconstruct: modulus product overflows");
        // Solve x + modulus * t == value (mod m) for t.
        const std::uint64_t target = (value % m + m - x % m) % m;
        const std::uint64_t t = mulmod(target, *invmod(modulus % m, m), m);
        x += modulus * t;
        modulus = static_cast<std::uint64_t>(next);
    }
    return x;
}

}  // namespace locsketch
