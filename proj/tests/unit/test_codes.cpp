#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "locsketch/codes.hpp"
#include "locsketch/modular.hpp"

using namespace locsketch;

namespace {

std::size_t hamming(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

Codeword full(const std::vector<Symbol>& symbols) {
    Codeword w;
    for (auto s : symbols) w.symbols.emplace_back(s);
    return w;
}

}  // namespace

TEST_SUITE("codes") {

TEST_CASE("hash_eval examples and domain") {
    CHECK(hash_eval(HashParams::make(1, 0, 101), 17) == 17);
    CHECK(hash_eval(HashParams::make(2, 3, 101), 50) == 2);
    CHECK_THROWS_AS(hash_eval(HashParams::make(2, 3, 101), 101), std::domain_error);
    CHECK_THROWS_AS(HashParams::make(0, 3, 101), std::invalid_argument);
    CHECK_THROWS_AS(HashParams::make(2, 3, 100), std::invalid_argument);
}

TEST_CASE("hash is injective and inverts") {
    const auto h = HashParams::make(37, 11, 101);
    std::set<std::uint64_t> seen;
    for (std::uint64_t x = 0; x < 101; ++x) {
        seen.insert(hash_eval(h, x));
        CHECK(h.invert(hash_eval(h, x)) == x);
    }
    CHECK(seen.size() == 101);
}

TEST_CASE("affine family is pairwise independent over all (a, b) for P = 13") {
    const std::uint64_t P = 13;
    for (std::uint64_t x1 = 0; x1 < P; ++x1)
        for (std::uint64_t x2 = 0; x2 < P; ++x2) {
            if (x1 == x2) continue;
            for (std::uint64_t y1 = 0; y1 < P; ++y1)
                for (std::uint64_t y2 = 0; y2 < P; ++y2) {
                    unsigned hits = 0;
                    for (std::uint64_t a = 0; a < P; ++a)
                        for (std::uint64_t b = 0; b < P; ++b)
                            hits += affine_hash(a, b, P, x1) == y1 && affine_hash(a, b, P, x2) == y2;
                    REQUIRE(hits == 1);
                }
        }
}

TEST_CASE("rs_encode examples") {
    const auto spec = RsCodeSpec::make(5, 2, 3);
    CHECK(rs_encode(spec, 11) == std::vector<Symbol>{3, 0, 2});
    CHECK(rs_encode(spec, 0) == std::vector<Symbol>{0, 0, 0});
    CHECK_THROWS_AS(rs_encode(spec, 25), std::domain_error);
    CHECK_THROWS_AS(RsCodeSpec::make(6, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(RsCodeSpec::make(5, 2, 6), std::invalid_argument);
}

TEST_CASE("RS distance is at least s - r, exhaustively") {
    const auto spec = RsCodeSpec::make(5, 2, 3);
    for (std::uint64_t a = 0; a < 25; ++a)
        for (std::uint64_t b = a + 1; b < 25; ++b) CHECK(hamming(rs_encode(spec, a), rs_encode(spec, b)) >= 1);
    const auto wide = RsCodeSpec::make(11, 3, 8);
    std::size_t min_d = 99;
    for (std::uint64_t a = 0; a < 1331; a += 3)
        for (std::uint64_t b = a + 1; b < 1331; b += 7) min_d = std::min(min_d, hamming(rs_encode(wide, a), rs_encode(wide, b)));
    CHECK(min_d >= wide.distance());
}

TEST_CASE("rs_decode corrects errors within radius, checked against brute force") {
    const auto spec = RsCodeSpec::make(5, 2, 5);
    auto word = rs_encode(spec, 11);
    CHECK(rs_decode(spec, word) == std::optional<std::uint64_t>(11));
    Rng rng(3);
    for (std::uint64_t x = 0; x < 25; ++x) {
        for (unsigned pos = 0; pos < 5; ++pos) {
            auto w = rs_encode(spec, x);
            w[pos] = (w[pos] + 1 + rng() % 4) % 5;
            // brute-force nearest codeword
            std::uint64_t best = 0;
            std::size_t best_d = 99;
            for (std::uint64_t y = 0; y < 25; ++y) {
                const auto d = hamming(rs_encode(spec, y), w);
                if (d < best_d) best = y, best_d = d;
            }
            CHECK(best == x);
            CHECK(rs_decode(spec, w) == std::optional<std::uint64_t>(x));
        }
    }
}

TEST_CASE("crt_encode examples") {
    const auto spec = CrtCodeSpec::make({5, 7}, 5, 1, 5);
    CHECK(crt_encode(spec, 3) == std::vector<Symbol>{3, 3});
    const auto two = CrtCodeSpec::make({5, 7, 11, 13}, 5, 2, 31);
    CHECK(crt_encode(two, 17) == std::vector<Symbol>{2, 3, 6, 4});
    CHECK(crt_encode(two, 0) == std::vector<Symbol>{0, 0, 0, 0});
    CHECK_THROWS_AS(crt_encode(two, 31), std::domain_error);
    CHECK_THROWS_AS(CrtCodeSpec::make({6, 9, 11}, 5, 2, 31), std::invalid_argument);
}

TEST_CASE("CRT words of distinct messages agree in at most r - 1 positions") {
    const auto spec = CrtCodeSpec::make({5, 7, 11, 13}, 5, 2, 31);
    for (std::uint64_t a = 0; a < 31; ++a)
        for (std::uint64_t b = a + 1; b < 31; ++b) {
            const auto wa = crt_encode(spec, a), wb = crt_encode(spec, b);
            CHECK(4 - hamming(wa, wb) <= 1);
        }
}

TEST_CASE("CRT projection is 2-uniform") {
    const std::vector<std::uint64_t> moduli{11, 13, 17, 19, 23, 25};
    const std::uint64_t P = 61;
    for (auto p : moduli) {
        std::vector<unsigned> freq(p, 0);
        for (std::uint64_t x = 0; x < P; ++x) ++freq[x % p];
        const unsigned top = *std::max_element(freq.begin(), freq.end());
        CHECK(static_cast<double>(top) / P <= 2.0 / static_cast<double>(p));
    }
}

TEST_CASE("select_moduli prefers primes in [q, 2q]") {
    CHECK(CrtCodeSpec::select_moduli(11, 4) == std::vector<std::uint64_t>{11, 13, 17, 19});
    // [11, 22] holds four primes and one composite (12) coprime to them.
    CHECK(CrtCodeSpec::select_moduli(11, 5) == std::vector<std::uint64_t>{11, 12, 13, 17, 19});
    CHECK_THROWS_AS(CrtCodeSpec::select_moduli(11, 6), std::invalid_argument);
    const auto six = CrtCodeSpec::select_moduli(16, 6);
    CHECK(six.size() == 6);
    for (auto m : six) {
        CHECK(m >= 16);
        CHECK(m <= 32);
    }
    for (std::size_t i = 0; i < six.size(); ++i)
        for (std::size_t j = i + 1; j < six.size(); ++j) CHECK(std::gcd(six[i], six[j]) == 1);
}

TEST_CASE("crt_decode corrects one error, checked against brute force") {
    const auto spec = CrtCodeSpec::make({11, 13, 17, 19, 23, 29}, 11, 2, 127);
    for (std::uint64_t x = 0; x < 127; ++x) {
        for (unsigned pos = 0; pos < 6; ++pos) {
            auto w = crt_encode(spec, x);
            w[pos] = static_cast<Symbol>((w[pos] + 1) % spec.moduli[pos]);
            CHECK(crt_decode(spec, w) == std::optional<std::uint64_t>(x));
        }
    }
}

TEST_CASE("parse_code_kind") {
    CHECK(parse_code_kind("RS") == CodeKind::ReedSolomon);
    CHECK(parse_code_kind("crt") == CodeKind::Crt);
    CHECK_THROWS_AS(parse_code_kind("ldpc"), std::invalid_argument);
}

TEST_CASE("sample_independent_code prime window and determinism") {
    Rng a(42), b(42);
    const auto c1 = sample_independent_code(CodeKind::Crt, 600, 6, 37, 2, a);
    const auto c2 = sample_independent_code(CodeKind::Crt, 600, 6, 37, 2, b);
    const std::uint64_t P = c1.hash().prime();
    CHECK(is_prime(P));
    CHECK(P == 691);
    CHECK(P >= 685);
    CHECK(P <= 1369);
    CHECK(c1.hash().a() == c2.hash().a());
    CHECK(c1.hash().b() == c2.hash().b());
    for (auto size : c1.alphabet_sizes()) {
        CHECK(size >= 37);
        CHECK(size <= 74);
    }
    // 2N must stay below q^r.
    CHECK_THROWS_AS(sample_independent_code(CodeKind::Crt, 685, 6, 37, 2, a), std::invalid_argument);
}

TEST_CASE("independent code round trip, erasures and distance") {
    Rng rng(5);
    for (auto kind : {CodeKind::Crt, CodeKind::ReedSolomon}) {
        const auto code = sample_independent_code(kind, 600, 6, 37, 2, rng);
        CHECK(code.distance() == 4);
        for (std::uint64_t c = 0; c < 600; ++c) {
            const auto sym = code.encode(c);
            REQUIRE(code.decode(full(sym)) == std::optional<std::uint64_t>(c));
            Codeword erased = full(sym);
            erased.symbols[c % 6].reset();
            // One erasure becomes one error after replacement, still inside the radius.
            CHECK(code.decode(erased) == std::optional<std::uint64_t>(c));
        }
        for (std::uint64_t a = 0; a < 200; ++a)
            for (std::uint64_t b = a + 1; b < 200; ++b) CHECK(hamming(code.encode(a), code.encode(b)) >= code.distance());
        CHECK_THROWS_AS(code.encode(600), std::domain_error);
    }
}

TEST_CASE("identity hash reduces to the inner code") {
    const auto inner = RsCodeSpec::make(37, 2, 6);
    const IndependentCode code(inner, HashParams::make(1, 0, 1031), 1000);
    for (std::uint64_t c = 0; c < 1000; c += 13) CHECK(code.encode(c) == rs_encode(inner, c));
}

TEST_CASE("coordinatewise collisions stay near 4 / |B_i|^2") {
    // Joint symbol collision of a fixed pair of cell pairs across sampled codes.
    Rng rng(9);
    const unsigned trials = 4000;
    unsigned joint = 0;
    for (unsigned t = 0; t < trials; ++t) {
        const auto code = sample_independent_code(CodeKind::Crt, 1024, 4, 16, 3, rng);
        const auto a = code.encode(3), b = code.encode(700), c = code.encode(41), d = code.encode(999);
        joint += a[0] == b[0] && c[0] == d[0];
    }
    const double bound = 4.0 / (16.0 * 16.0);
    CHECK(static_cast<double>(joint) / trials <= bound + 0.01);
}

TEST_CASE("count_colliding_symbols matches a direct recount") {
    Rng rng(11);
    const auto code = sample_independent_code(CodeKind::Crt, 4096, 6, 32, 3, rng);
    std::vector<std::uint64_t> S, S2;
    for (std::uint64_t i = 0; i < 40; ++i) S.push_back((i * 97 + 5) % 4096);
    S2 = S;
    for (std::uint64_t i = 0; i < 40; ++i) S2.push_back((i * 389 + 1) % 4096);
    std::size_t expect = 0;
    for (auto a : S)
        for (unsigned i = 0; i < 6; ++i) {
            std::set<Symbol> others;
            for (auto b : S2)
                if (b != a) others.insert(code.encode(b)[i]);
            expect += others.count(code.encode(a)[i]);
        }
    CHECK(count_colliding_symbols(code, S, S2) == expect);
    const std::vector<std::uint64_t> one{7};
    CHECK(count_colliding_symbols(code, one, one) == 0);
}

TEST_CASE("CodeParams config round trip") {
    CodeParams p{CodeKind::ReedSolomon, 600, 6, 37, 2, 17};
    const auto back = CodeParams::from_config(p.to_config());
    CHECK(back.kind == p.kind);
    CHECK(back.domain_size == 600);
    CHECK(back.s == 6);
    CHECK(back.q == 37);
    CHECK(back.r == 2);
    CHECK(back.seed == 17);
    CHECK(back.sample().hash().a() == p.sample().hash().a());
    auto broken = p.to_config();
    broken.erase("q");
    CHECK_THROWS_AS(CodeParams::from_config(broken), std::invalid_argument);
}

}
