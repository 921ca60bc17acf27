#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "locsketch/aduaf.hpp"
#include "locsketch/measurement.hpp"
#include "locsketch/startracker.hpp"

using namespace locsketch;

namespace {

struct Planted {
    double x, y, photons;
};

// Noiseless PSF-blurred frame with stars at the given frame coordinates.
Image render_frame(const std::vector<Planted>& stars, std::size_t n = 800) {
    PatchConfig pc;
    pc.n = n;
    pc.poisson = false;
    StarCatalog cat;
    std::uint32_t id = 0;
    for (const auto& s : stars)
        cat.stars.push_back({id++, s.x * pc.pixel_scale() - pc.fov / 2, s.y * pc.pixel_scale() - pc.fov / 2, s.photons});
    Rng rng(0);
    return render_patch(rng, cat, 0.0, 0.0, pc).clean;
}

double torus_gap(double a, double b, double p) {
    const double d = std::abs(std::fmod(a, p) - std::fmod(b, p));
    return std::min(d, p - d);
}

// Stars far apart in the frame and not sharing a window in either fold.
std::vector<Planted> separated_stars(Rng& rng, std::size_t count, double min_gap = 40.0) {
    std::uniform_real_distribution<double> pos(5.0, 795.0), mass(2000.0, 6000.0);
    std::vector<Planted> out;
    while (out.size() < count) {
        const Planted s{pos(rng), pos(rng), mass(rng)};
        bool ok = true;
        for (const auto& o : out) {
            ok &= std::hypot(o.x - s.x, o.y - s.y) >= min_gap;
            for (double p : {26.0, 31.0}) ok &= std::max(torus_gap(o.x, s.x, p), torus_gap(o.y, s.y, p)) >= 6.0;
        }
        if (ok) out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_SUITE("aduaf") {

TEST_CASE("config validation") {
    AduafConfig c;
    CHECK_NOTHROW(c.validate());
    c.p1 = 31;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.p1 = 13;
    c.p2 = 31;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);  // 13 * 31 < 800
}

TEST_CASE("single bright star is the first pick") {
    AduafConfig c;
    Image z(26);
    z.at(10, 4) = 50.0;
    z.at(2, 20) = 1.0;
    const auto cells = pick_heavy_cells(z, c, 1);
    REQUIRE_FALSE(cells.empty());
    CHECK(cells[0].mass == 50.0);
    CHECK(cells[0].top <= 10);
    CHECK(cells[0].top + 2 >= 10);
    CHECK(cells[0].left <= 4);
    CHECK(cells[0].left + 2 >= 4);
    CHECK(cells[0].cx == doctest::Approx(10.5));
    CHECK(cells[0].cy == doctest::Approx(4.5));
    CHECK(cells.size() <= c.cells_per_fold);
}

TEST_CASE("two stars one pixel apart obey the overlap rule") {
    AduafConfig c;
    Image z(26);
    z.at(12, 12) = 10.0;
    z.at(12, 13) = 9.0;
    const auto cells = pick_heavy_cells(z, c, 1);
    for (std::size_t a = 0; a < cells.size(); ++a)
        for (std::size_t b = a + 1; b < cells.size(); ++b) CHECK(window_overlap(cells[a], cells[b], 3, 26) <= 4);
    c.overlap_limit = 0;
    const auto strict = pick_heavy_cells(z, c, 1);
    for (std::size_t a = 0; a < strict.size(); ++a)
        for (std::size_t b = a + 1; b < strict.size(); ++b) CHECK(window_overlap(strict[a], strict[b], 3, 26) == 0);
}

TEST_CASE("window at the torus corner wraps across all edges") {
    AduafConfig c;
    Image z(26);
    z.at(0, 0) = 4.0;
    z.at(25, 25) = 3.0;
    z.at(0, 25) = 2.0;
    z.at(25, 0) = 1.0;
    const auto cells = pick_heavy_cells(z, c, 1);
    REQUIRE_FALSE(cells.empty());
    CHECK(cells[0].mass == 10.0);
    CHECK(cells[0].top == 24);
    CHECK(cells[0].left == 24);
    // Rows 25 and 0 sit at window offsets 1 and 2; likewise the columns.
    CHECK(cells[0].cx == doctest::Approx(24.0 + (4.0 * 1 + 6.0 * 2) / 10.0 + 0.5));
    CHECK(cells[0].cy == doctest::Approx(24.0 + (5.0 * 1 + 5.0 * 2) / 10.0 + 0.5));
}

TEST_CASE("window_overlap counts torus pixels") {
    const PickedCell a{1, 0, 0}, b{1, 1, 1}, far{1, 10, 10}, wrap{1, 25, 25};
    CHECK(window_overlap(a, a, 3, 26) == 9);
    CHECK(window_overlap(a, b, 3, 26) == 4);
    CHECK(window_overlap(a, far, 3, 26) == 0);
    CHECK(window_overlap(a, wrap, 3, 26) == 4);
}

TEST_CASE("match_pairs basics") {
    AduafConfig c;
    const PickedCell a{1, 0, 0, 10.0, 3.3, 4.6};
    const PickedCell b{2, 0, 0, 10.0, 7.3, 1.6};
    SUBCASE("identical singleton lists give one pair") {
        const std::vector<PickedCell> l1{a}, l2{a};
        const auto pairs = match_pairs(l1, l2, c);
        REQUIRE(pairs.size() == 1);
        CHECK(pairs[0].distance == 0.0);
        CHECK(pair_distance(a, b, c) == doctest::Approx(0.0));
    }
    SUBCASE("masses 1 and 10 never pair") {
        c.mass_tol = 0.2;
        PickedCell dim = a;
        dim.mass = 1.0;
        const std::vector<PickedCell> l1{dim}, l2{a};
        CHECK(match_pairs(l1, l2, c).empty());
    }
    SUBCASE("each cell used once and max_pairs respected") {
        c.max_pairs = 2;
        const std::vector<PickedCell> l1{a, a, a}, l2{b, b, b};
        const auto pairs = match_pairs(l1, l2, c);
        CHECK(pairs.size() == 2);
        CHECK(pairs[0].first != pairs[1].first);
        CHECK(pairs[0].second != pairs[1].second);
    }
}

TEST_CASE("match_pairs is symmetric") {
    AduafConfig c;
    Rng rng(4);
    std::uniform_real_distribution<double> m(5.0, 20.0), pos(0.0, 26.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<PickedCell> l1, l2;
        for (int i = 0; i < 8; ++i) l1.push_back({1, 0, 0, m(rng), pos(rng), pos(rng)});
        for (int i = 0; i < 8; ++i) l2.push_back({2, 0, 0, m(rng), pos(rng), pos(rng)});
        std::set<std::pair<std::size_t, std::size_t>> ab, ba;
        for (const auto& p : match_pairs(l1, l2, c)) ab.insert({p.first, p.second});
        for (const auto& p : match_pairs(l2, l1, c)) ba.insert({p.second, p.first});
        CHECK(ab == ba);
    }
}

TEST_CASE("fold then reconstruct round trips") {
    AduafConfig c;
    SUBCASE("(17, 413)") {
        Image img(800);
        img.at(17, 413) = 100.0;
        const auto stars = aduaf_recover(fold2d(img, 26), fold2d(img, 31), c);
        REQUIRE(stars.size() == 1);
        CHECK(stars[0].x == doctest::Approx(17.5));
        CHECK(stars[0].y == doctest::Approx(413.5));
    }
    SUBCASE("(0, 0)") {
        Image img(800);
        img.at(0, 0) = 100.0;
        const auto stars = aduaf_recover(fold2d(img, 26), fold2d(img, 31), c);
        REQUIRE(stars.size() == 1);
        CHECK(stars[0].x == doctest::Approx(0.5));
        CHECK(stars[0].y == doctest::Approx(0.5));
    }
    SUBCASE("every integer anchor on a stride") {
        for (std::size_t x = 0; x < 800; x += 7) {
            const double cx = static_cast<double>(x) + 0.3;
            const PickedCell a{1, 0, 0, 5.0, std::fmod(cx, 26.0), 2.0};
            const PickedCell b{2, 0, 0, 5.0, std::fmod(cx, 31.0), 2.0};
            const auto star = reconstruct_position(a, b, c);
            REQUIRE(star.has_value());
            CHECK(star->x == doctest::Approx(cx));
        }
    }
}

TEST_CASE("mismatched pairs are ghosts at about 1 - n / (p1 p2)") {
    AduafConfig c;
    Rng rng(9);
    std::uniform_real_distribution<double> pos(0.0, 800.0);
    const int trials = 20000;
    int ghosts = 0;
    for (int t = 0; t < trials; ++t) {
        const double x1 = pos(rng), x2 = pos(rng);
        // Same sub-pixel part so only the integer anchors disagree.
        const double f = x1 - std::floor(x1);
        const double y2 = std::floor(x2) + f;
        const PickedCell a{1, 0, 0, 5.0, std::fmod(x1, 26.0), 2.5};
        const PickedCell b{2, 0, 0, 5.0, std::fmod(y2, 31.0), 2.5};
        ghosts += !reconstruct_position(a, b, c).has_value();
    }
    const double expected = 1.0 - 800.0 / (26.0 * 31.0);
    CHECK(static_cast<double>(ghosts) / trials == doctest::Approx(expected).epsilon(0.3));
}

TEST_CASE("empty sky gives no stars") {
    AduafConfig c;
    AduafStats stats;
    CHECK(aduaf_recover(Image(26), Image(31), c, &stats).empty());
    CHECK(stats.picked1 == 0);
    CHECK_THROWS_AS(aduaf_recover(Image(25), Image(31), c), std::invalid_argument);
}

TEST_CASE("planted separated stars are all recovered within half a pixel") {
    AduafConfig c;
    c.cells_per_fold = 30;
    c.max_pairs = 24;
    Rng rng(11);
    for (int t = 0; t < 10; ++t) {
        const auto truth = separated_stars(rng, 5);
        const Image img = render_frame(truth);
        const auto z1 = fold2d(img, 26), z2 = fold2d(img, 31);
        const auto stars = aduaf_recover(z1, z2, c);
        for (const auto& s : truth) {
            double best = 1e9;
            for (const auto& r : stars) best = std::min(best, std::max(std::abs(r.x - s.x), std::abs(r.y - s.y)));
            CHECK(best <= 0.5);
        }
        // Mass ordering and no two outputs within the merge radius.
        for (std::size_t i = 1; i < stars.size(); ++i) CHECK(stars[i - 1].mass >= stars[i].mass);
        for (std::size_t i = 0; i < stars.size(); ++i)
            for (std::size_t j = i + 1; j < stars.size(); ++j)
                CHECK(std::hypot(stars[i].x - stars[j].x, stars[i].y - stars[j].y) >= c.merge_radius);
        // Overlap invariant on what was picked.
        for (int fold = 1; fold <= 2; ++fold) {
            const std::size_t p = fold == 1 ? 26 : 31;
            const auto cells = pick_heavy_cells(fold == 1 ? z1 : z2, c, fold);
            for (std::size_t i = 0; i < cells.size(); ++i)
                for (std::size_t j = i + 1; j < cells.size(); ++j) CHECK(window_overlap(cells[i], cells[j], 3, p) <= 4);
        }
    }
}

TEST_CASE("planted stars yield correct pairs") {
    AduafConfig c;
    c.cells_per_fold = 30;
    c.max_pairs = 24;
    Rng rng(12);
    for (int t = 0; t < 10; ++t) {
        const auto truth = separated_stars(rng, 4);
        const Image img = render_frame(truth);
        const auto z1 = fold2d(img, 26), z2 = fold2d(img, 31);
        const auto cells1 = pick_heavy_cells(z1, c, 1), cells2 = pick_heavy_cells(z2, c, 2);
        const auto pairs = match_pairs(cells1, cells2, c);
        std::size_t correct = 0;
        for (const auto& s : truth) {
            for (const auto& p : pairs) {
                const auto r = reconstruct_position(cells1[p.first], cells2[p.second], c);
                if (r && std::abs(r->x - s.x) <= 1.0 && std::abs(r->y - s.y) <= 1.0) {
                    ++correct;
                    break;
                }
            }
        }
        CHECK(correct == truth.size());
    }
}

TEST_CASE("noiseless blurred star centroid within 0.15 px") {
    AduafConfig c;
    Rng rng(13);
    std::uniform_real_distribution<double> pos(10.0, 790.0);
    for (int t = 0; t < 50; ++t) {
        const Planted s{pos(rng), pos(rng), 3000.0};
        const Image img = render_frame({s});
        const auto stars = aduaf_recover(fold2d(img, 26), fold2d(img, 31), c);
        REQUIRE_FALSE(stars.empty());
        CHECK(std::abs(stars[0].x - s.x) <= 0.15);
        CHECK(std::abs(stars[0].y - s.y) <= 0.15);
    }
}

TEST_CASE("stars CSV") {
    const std::vector<RecoveredStar> stars{{1.5, 2.5, 3.0}};
    std::ostringstream out;
    write_stars_csv(out, stars);
    CHECK(out.str() == "x,y,mass\n1.5,2.5,3\n");
}

}
