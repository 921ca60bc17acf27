#include "locsketch/codes.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

#include "locsketch/modular.hpp"

namespace locsketch {

std::uint64_t affine_hash(std::uint64_t a, std::uint64_t b, std::uint64_t prime, std::uint64_t x) {
    return (mulmod(a % prime, x % prime, prime) + b % prime) % prime;
}

HashParams HashParams::make(std::uint64_t a, std::uint64_t b, std::uint64_t prime) {
    if (!is_prime(prime)) throw std::invalid_argument("hash modulus " + std::to_string(prime) + " is not prime");
    if (a == 0 || a >= prime) throw std::invalid_argument("hash multiplier must lie in [1, P-1]");
    if (b >= prime) throw std::invalid_argument("hash offset must lie in [0, P-1]");
    return HashParams(a, b, prime, *invmod(a, prime));
}

std::uint64_t HashParams::invert(std::uint64_t y) const {
    return mulmod(a_inv_, (y % prime_ + prime_ - b_) % prime_, prime_);
}

std::uint64_t hash_eval(const HashParams& h, std::uint64_t x) {
    if (x >= h.prime()) throw std::domain_error("hash_eval: x outside [P]");
    return affine_hash(h.a(), h.b(), h.prime(), x);
}

// ---------------------------------------------------------------------------
// Reed-Solomon

RsCodeSpec RsCodeSpec::make(std::uint64_t q, unsigned r, unsigned s) {
    if (!is_prime(q)) throw std::invalid_argument("RS field size q=" + std::to_string(q) + " is not prime");
    if (r < 1 || r >= s) throw std::invalid_argument("RS code needs 1 <= r < s");
    if (s > q) throw std::invalid_argument("RS code needs s <= q distinct evaluation points");
    if (!checked_pow(q, r)) throw std::invalid_argument("RS message space q^r overflows 64 bits");
    return RsCodeSpec{q, r, s};
}

std::uint64_t RsCodeSpec::message_space() const { return *checked_pow(q, r); }

namespace {

std::uint64_t eval_poly(std::span<const std::uint64_t> coeffs, std::uint64_t point, std::uint64_t q) {
    std::uint64_t acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (mulmod(acc, point, q) + *it) % q;
    return acc;
}

// Solves A x = b over F_q (A is rows x cols, row-major, augmented with b).
// Free variables are set to zero. Returns nullopt when inconsistent.
std::optional<std::vector<std::uint64_t>> solve_mod(std::vector<std::vector<std::uint64_t>> aug,
                                                    std::size_t cols, std::uint64_t q) {
    const std::size_t rows = aug.size();
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t pivot = row;
        while (pivot < rows && aug[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(aug[pivot], aug[row]);
        const std::uint64_t inv = *invmod(aug[row][col], q);
        for (auto& v : aug[row]) v = mulmod(v, inv, q);
        for (std::size_t other = 0; other < rows; ++other) {
            if (other == row || aug[other][col] == 0) continue;
            const std::uint64_t factor = aug[other][col];
            for (std::size_t c = 0; c <= cols; ++c) {
                aug[other][c] = (aug[other][c] + q - mulmod(factor, aug[row][c], q)) % q;
            }
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (std::size_t r = row; r < rows; ++r) {
        if (aug[r][cols] != 0) return std::nullopt;
    }
    std::vector<std::uint64_t> x(cols, 0);
    for (std::size_t r = 0; r < pivot_col.size(); ++r) x[pivot_col[r]] = aug[r][cols];
    return x;
}

}  // namespace

std::vector<Symbol> rs_encode(const RsCodeSpec& spec, std::uint64_t x) {
    if (x >= spec.message_space()) throw std::domain_error("rs_encode: message outside [q^r]");
    std::vector<std::uint64_t> coeffs(spec.r);
    for (auto& c : coeffs) {
        c = x % spec.q;
        x /= spec.q;
    }
    std::vector<Symbol> out(spec.s);
    for (unsigned i = 0; i < spec.s; ++i) {
        out[i] = static_cast<Symbol>(eval_poly(coeffs, (i + 1) % spec.q, spec.q));
    }
    return out;
}

std::optional<std::uint64_t> rs_decode(const RsCodeSpec& spec, std::span<const Symbol> word) {
    if (word.size() != spec.s) return std::nullopt;
    const std::uint64_t q = spec.q;
    for (Symbol y : word) {
        if (y >= q) return std::nullopt;
    }
    const unsigned e = (spec.s - spec.r) / 2;
    // Unknowns: E_0..E_{e-1} (E monic of degree e), Q_0..Q_{e+r-1}.
    const std::size_t n_e = e;
    const std::size_t n_q = e + spec.r;
    const std::size_t cols = n_e + n_q;
    std::vector<std::vector<std::uint64_t>> aug(spec.s, std::vector<std::uint64_t>(cols + 1, 0));
    for (unsigned k = 0; k < spec.s; ++k) {
        const std::uint64_t alpha = (k + 1) % q;
        const std::uint64_t y = word[k];
        std::uint64_t pw = 1;
        for (std::size_t j = 0; j < n_q; ++j) {
            if (j < n_e) aug[k][j] = (q - mulmod(y, pw, q)) % q;
            aug[k][n_e + j] = pw;
            if (j == n_e) aug[k][cols] = mulmod(y, pw, q);  // y * alpha^e
            pw = mulmod(pw, alpha, q);
        }
    }
    const auto sol = solve_mod(std::move(aug), cols, q);
    if (!sol) return std::nullopt;

    std::vector<std::uint64_t> err(sol->begin(), sol->begin() + static_cast<std::ptrdiff_t>(n_e));
    err.push_back(1);
    std::vector<std::uint64_t> rem(sol->begin() + static_cast<std::ptrdiff_t>(n_e), sol->end());
    // Long division rem / err; err is monic.
    std::vector<std::uint64_t> quot(n_q >= err.size() ? n_q - err.size() + 1 : 0, 0);
    for (std::size_t d = quot.size(); d-- > 0;) {
        const std::uint64_t lead = rem[d + e];
        quot[d] = lead;
        if (lead == 0) continue;
        for (std::size_t j = 0; j <= e; ++j) rem[d + j] = (rem[d + j] + q - mulmod(lead, err[j], q)) % q;
    }
    if (std::any_of(rem.begin(), rem.end(), [](std::uint64_t v) { return v != 0; })) return std::nullopt;
    if (quot.size() > spec.r &&
        std::any_of(quot.begin() + spec.r, quot.end(), [](std::uint64_t v) { return v != 0; })) {
        return std::nullopt;
    }
    quot.resize(spec.r, 0);

    unsigned disagreements = 0;
    for (unsigned k = 0; k < spec.s; ++k) {
        if (eval_poly(quot, (k + 1) % q, q) != word[k]) ++disagreements;
    }
    if (disagreements > e) return std::nullopt;

    std::uint64_t x = 0;
    for (std::size_t j = spec.r; j-- > 0;) x = x * q + quot[j];
    return x;
}

// ---------------------------------------------------------------------------
// CRT

CrtCodeSpec CrtCodeSpec::make(std::vector<std::uint64_t> moduli, std::uint64_t q, unsigned r,
                              std::uint64_t prime) {
    const auto s = static_cast<unsigned>(moduli.size());
    if (r < 1 || r >= s) throw std::invalid_argument("CRT code needs 1 <= r < s");
    if (prime == 0) throw std::invalid_argument("CRT message space must be nonempty");
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (moduli[i] < 2) throw std::invalid_argument("CRT moduli must be >= 2");
        for (std::size_t j = i + 1; j < moduli.size(); ++j) {
            if (std::gcd(moduli[i], moduli[j]) != 1) {
                throw std::invalid_argument("CRT moduli " + std::to_string(moduli[i]) + " and " +
                                            std::to_string(moduli[j]) + " are not coprime");
            }
        }
    }
    std::vector<std::uint64_t> sorted = moduli;
    std::sort(sorted.begin(), sorted.end());
    unsigned __int128 prod = 1;
    for (unsigned i = 0; i < r; ++i) prod *= sorted[i];
    if (prod < prime) {
        throw std::invalid_argument("product of the r smallest CRT moduli is below P=" + std::to_string(prime));
    }
    return CrtCodeSpec{std::move(moduli), q, r, prime};
}

std::vector<std::uint64_t> CrtCodeSpec::select_moduli(std::uint64_t q, unsigned count) {
    std::vector<std::uint64_t> chosen;
    for (std::uint64_t m = std::max<std::uint64_t>(q, 2); m <= 2 * q && chosen.size() < count; ++m) {
        if (is_prime(m)) chosen.push_back(m);
    }
    for (std::uint64_t m = std::max<std::uint64_t>(q, 2); m <= 2 * q && chosen.size() < count; ++m) {
        if (is_prime(m)) continue;
        const bool coprime = std::all_of(chosen.begin(), chosen.end(),
                                         [m](std::uint64_t c) { return std::gcd(c, m) == 1; });
        if (coprime) chosen.push_back(m);
    }
    if (chosen.size() < count) {
        throw std::invalid_argument("only " + std::to_string(chosen.size()) +
                                    " pairwise-coprime moduli exist in [" + std::to_string(q) + ", " +
                                    std::to_string(2 * q) + "]");
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<Symbol> crt_encode(const CrtCodeSpec& spec, std::uint64_t x) {
    if (x >= spec.prime) throw std::domain_error("crt_encode: message outside [P]");
    std::vector<Symbol> out;
    out.reserve(spec.moduli.size());
    for (auto m : spec.moduli) out.push_back(static_cast<Symbol>(x % m));
    return out;
}

std::optional<std::uint64_t> crt_decode(const CrtCodeSpec& spec, std::span<const Symbol> word) {
    const unsigned s = spec.s();
    if (word.size() != s) return std::nullopt;
    for (unsigned i = 0; i < s; ++i) {
        if (word[i] >= spec.moduli[i]) return std::nullopt;
    }
    // agreements > s - (s-r)/2  <=>  2*agreements > s + r
    std::vector<unsigned> pick(spec.r);
    std::iota(pick.begin(), pick.end(), 0U);
    std::vector<Residue> residues(spec.r);
    while (true) {
        for (unsigned j = 0; j < spec.r; ++j) residues[j] = {word[pick[j]], spec.moduli[pick[j]]};
        const std::uint64_t x = crt_reconstruct(residues);
        if (x < spec.prime) {
            unsigned agree = 0;
            for (unsigned i = 0; i < s; ++i) agree += (x % spec.moduli[i] == word[i]) ? 1U : 0U;
            if (2 * agree > s + spec.r) return x;
        }
        // next r-combination of [s]
        int j = static_cast<int>(spec.r) - 1;
        while (j >= 0 && pick[j] == s - spec.r + static_cast<unsigned>(j)) --j;
        if (j < 0) break;
        ++pick[j];
        for (auto t = static_cast<unsigned>(j) + 1; t < spec.r; ++t) pick[t] = pick[t - 1] + 1;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string to_string(CodeKind kind) { return kind == CodeKind::ReedSolomon ? "rs" : "crt"; }

CodeKind parse_code_kind(const std::string& text) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "rs" || lower == "reed-solomon") return CodeKind::ReedSolomon;
    if (lower == "crt") return CodeKind::Crt;
    throw std::invalid_argument("unknown code kind '" + text + "' (expected rs or crt)");
}

std::size_t Codeword::erasures() const {
    return static_cast<std::size_t>(
        std::count_if(symbols.begin(), symbols.end(), [](const auto& s) { return !s.has_value(); }));
}

IndependentCode::IndependentCode(Inner inner, HashParams hash, std::uint64_t domain_size)
    : inner_(std::move(inner)), hash_(hash), domain_size_(domain_size) {
    if (hash_.prime() < domain_size_) throw std::invalid_argument("hash prime P is smaller than N");
    if (const auto* rs = std::get_if<RsCodeSpec>(&inner_)) {
        if (hash_.prime() > rs->message_space()) throw std::invalid_argument("P exceeds the RS message space q^r");
        alphabet_sizes_.assign(rs->s, rs->q);
    } else {
        const auto& crt = std::get<CrtCodeSpec>(inner_);
        if (crt.prime != hash_.prime()) throw std::invalid_argument("CRT message prime differs from hash prime");
        alphabet_sizes_ = crt.moduli;
    }
}

CodeKind IndependentCode::kind() const {
    return std::holds_alternative<RsCodeSpec>(inner_) ? CodeKind::ReedSolomon : CodeKind::Crt;
}

unsigned IndependentCode::s() const {
    return std::visit([](const auto& c) -> unsigned {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, RsCodeSpec>) return c.s;
        else return c.s();
    }, inner_);
}

unsigned IndependentCode::r() const {
    return std::visit([](const auto& c) { return c.r; }, inner_);
}

std::uint64_t IndependentCode::q() const {
    return std::visit([](const auto& c) { return c.q; }, inner_);
}

std::vector<Symbol> IndependentCode::encode(std::uint64_t cell) const {
    if (cell >= domain_size_) throw std::domain_error("code_encode: cell outside [N]");
    const std::uint64_t y = hash_eval(hash_, cell);
    if (const auto* rs = std::get_if<RsCodeSpec>(&inner_)) return rs_encode(*rs, y);
    return crt_encode(std::get<CrtCodeSpec>(inner_), y);
}

std::optional<std::uint64_t> IndependentCode::decode(const Codeword& word) const {
    if (word.symbols.size() != s()) return std::nullopt;
    std::vector<Symbol> filled;
    filled.reserve(word.symbols.size());
    for (const auto& sym : word.symbols) filled.push_back(sym.value_or(0));
    std::optional<std::uint64_t> y;
    if (const auto* rs = std::get_if<RsCodeSpec>(&inner_)) {
        y = rs_decode(*rs, filled);
    } else {
        y = crt_decode(std::get<CrtCodeSpec>(inner_), filled);
    }
    if (!y || *y >= hash_.prime()) return std::nullopt;
    return hash_.invert(*y);
}

std::uint64_t select_code_prime(std::uint64_t domain_size, std::uint64_t q, unsigned r) {
    const auto space = checked_pow(q, r);
    if (!space) throw std::invalid_argument("q^r overflows 64 bits");
    if (2 * static_cast<unsigned __int128>(domain_size) >= *space) {
        throw std::invalid_argument("code needs 2N < q^r (N=" + std::to_string(domain_size) +
                                    ", q^r=" + std::to_string(*space) + ")");
    }
    const std::uint64_t lo = std::max<std::uint64_t>((*space + 1) / 2, domain_size);
    const auto p = next_prime(lo, *space);
    if (!p) throw std::invalid_argument("no prime in [q^r/2, q^r]");
    return *p;
}

IndependentCode sample_independent_code(CodeKind kind, std::uint64_t domain_size, unsigned s,
                                        std::uint64_t q, unsigned r, Rng& rng) {
    if (domain_size == 0) throw std::invalid_argument("code domain must be nonempty");
    const std::uint64_t prime = select_code_prime(domain_size, q, r);
    IndependentCode::Inner inner = kind == CodeKind::ReedSolomon
                                       ? IndependentCode::Inner{RsCodeSpec::make(q, r, s)}
                                       : IndependentCode::Inner{CrtCodeSpec::make(
                                             CrtCodeSpec::select_moduli(q, s), q, r, prime)};
    std::uniform_int_distribution<std::uint64_t> pick_a(1, prime - 1);
    std::uniform_int_distribution<std::uint64_t> pick_b(0, prime - 1);
    const std::uint64_t a = pick_a(rng);
    const std::uint64_t b = pick_b(rng);
    return IndependentCode(std::move(inner), HashParams::make(a, b, prime), domain_size);
}

namespace {

std::uint64_t require_uint(const std::map<std::string, std::string>& section, const std::string& key) {
    const auto it = section.find(key);
    if (it == section.end()) throw std::invalid_argument("missing config key '" + key + "'");
    try {
        std::size_t used = 0;
        const auto v = std::stoull(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "' is not a non-negative integer: " + it->second);
    }
}

}  // namespace

std::map<std::string, std::string> CodeParams::to_config() const {
    return {{"kind", to_string(kind)},           {"N", std::to_string(domain_size)},
            {"s", std::to_string(s)},            {"q", std::to_string(q)},
            {"r", std::to_string(r)},            {"seed", std::to_string(seed)}};
}

CodeParams CodeParams::from_config(const std::map<std::string, std::string>& section) {
    CodeParams p;
    const auto kind = section.find("kind");
    if (kind == section.end()) throw std::invalid_argument("missing config key 'kind'");
    p.kind = parse_code_kind(kind->second);
    p.domain_size = require_uint(section, "N");
    p.s = static_cast<unsigned>(require_uint(section, "s"));
    p.q = require_uint(section, "q");
    p.r = static_cast<unsigned>(require_uint(section, "r"));
    p.seed = require_uint(section, "seed");
    return p;
}

IndependentCode CodeParams::sample() const {
    Rng rng(seed);
    return sample_independent_code(kind, domain_size, s, q, r, rng);
}

std::size_t count_colliding_symbols(const IndependentCode& code, std::span<const std::uint64_t> S,
                                    std::span<const std::uint64_t> S_prime) {
    std::vector<std::vector<Symbol>> other;
    other.reserve(S_prime.size());
    for (auto c : S_prime) other.push_back(code.encode(c));
    std::size_t count = 0;
    for (auto a : S) {
        const auto ga = code.encode(a);
        for (unsigned i = 0; i < code.s(); ++i) {
            for (std::size_t j = 0; j < S_prime.size(); ++j) {
                if (S_prime[j] != a && other[j][i] == ga[i]) {
                    ++count;
                    break;
                }
            }
        }
    }
    return count;
}

}  // namespace locsketch
