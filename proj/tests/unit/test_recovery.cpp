#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "locsketch/pipeline.hpp"
#include "locsketch/recovery.hpp"

using namespace locsketch;

namespace {

PlanConfig plan_config(std::size_t n, std::size_t k) {
    PlanConfig pc;
    pc.n = n;
    pc.w_prime = 8;
    pc.k = k;
    pc.kind = CodeKind::Crt;
    pc.q = 256;
    pc.s = 10;
    pc.r = 2;
    return pc;
}

double diameter(const std::vector<std::size_t>& members, const HeavySet& heavy, const FeatureNorm& norm) {
    double d = 0.0;
    for (auto a : members)
        for (auto b : members) d = std::max(d, feature_distance(heavy.entries[a].feature, heavy.entries[b].feature, norm));
    return d;
}

}  // namespace

TEST_SUITE("recovery") {

TEST_CASE("find_heavy thresholds and matches a brute-force scan") {
    Rng rng(1);
    const auto plan = build_plan(plan_config(64, 8), rng);
    const FeatureNorm norm{10.0, 1.0};
    CHECK(find_heavy(measure(plan, Image(64)), 1.0, norm).entries.empty());

    Image img(64);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (double& v : img.pixels()) v = u(rng) < 0.1 ? 40.0 * u(rng) : 0.0;
    const Sketch sk = measure(plan, img);
    const auto heavy = find_heavy(sk, 1.0, norm);
    std::set<std::pair<unsigned, std::uint64_t>> expected, got;
    for (unsigned i = 0; i < sk.rows(); ++i)
        for (std::uint64_t j = 0; j < sk.row_sizes()[i]; ++j) {
            double m = 0.0;
            for (double v : sk.bucket(i, j)) m += v;
            if (std::abs(m) / 10.0 >= 0.5) expected.insert({i, j});
        }
    for (const auto& e : heavy.entries) got.insert({e.row, e.bucket});
    CHECK(got == expected);
    CHECK(find_heavy(sk, 2.0, norm).entries.size() <= heavy.entries.size());
    CHECK_THROWS_AS(find_heavy(sk, 0.0, norm), std::invalid_argument);
}

TEST_CASE("single noiseless object gives one heavy bucket per row and one full codeword") {
    Rng rng(2);
    const auto plan = build_plan(plan_config(64, 8), rng);
    const auto templates = scaled_templates(2, 1, 10.0, 0.0);
    const FeatureNorm norm = default_norm(templates);
    const double T = distinguishability_threshold(templates, 8, norm);
    const ModelConfig model{64, 2, 8, 1};
    // Put the object wholly inside a cell.
    const auto& g = plan.grid();
    std::size_t x = 0, y = 0;
    while ((x + g.vx) % 8 > 5) ++x;
    while ((y + g.vy) % 8 > 5) ++y;
    const Placement p{{{x, y}}};
    const Sketch sk = measure(plan, render(model, templates, p));
    const auto heavy = find_heavy(sk, T, norm);
    CHECK(heavy.entries.size() == plan.rows());
    const auto part = cluster_heavy(heavy, 1, T, norm, 0.0);
    REQUIRE(part.clusters.size() == 1);
    CHECK(part.clusters[0].size() == plan.rows());
    CHECK(part.outliers.empty());
    const auto words = build_codewords(part, heavy, plan.rows(), 1);
    CHECK(words[0].erasures() == 0);
    const auto res = recover(sk, plan, 1, T, norm);
    REQUIRE(res.cells.size() == 1);
    CHECK(res.cells[0].first == g.cell_of(x, y));
    CHECK(res.decodes[0].errors == 0);
}

TEST_CASE("kcenter_outliers on planted clusters") {
    const FeatureNorm norm{1.0, 1.0};
    SUBCASE("well-separated singletons") {
        const std::vector<FeatureVector> pts{{1.0, 0, 0}, {5.0, 0, 0}, {9.0, 0, 0}};
        const auto kc = kcenter_outliers(pts, 3, 0.1, norm);
        CHECK(kc.centers.size() == 3);
        std::set<int> ids(kc.assignment.begin(), kc.assignment.end());
        CHECK(ids.size() == 3);
        CHECK(ids.count(-1) == 0);
    }
    SUBCASE("k = 1 picks the densest ball") {
        const std::vector<FeatureVector> pts{{1.0, 0, 0}, {1.05, 0, 0}, {1.08, 0, 0}, {5.0, 0, 0}};
        const auto kc = kcenter_outliers(pts, 1, 0.1, norm);
        REQUIRE(kc.centers.size() == 1);
        CHECK(kc.assignment[3] == -1);
        CHECK(kc.assignment[0] == 0);
        CHECK(kc.assignment[2] == 0);
    }
    SUBCASE("planted diameter T/12 clusters plus junk") {
        Rng rng(3);
        const double T = 1.2;
        std::uniform_real_distribution<double> jitter(0.0, T / 12.0);
        std::vector<FeatureVector> pts;
        for (int c = 0; c < 5; ++c)
            for (int m = 0; m < 6; ++m) pts.push_back({10.0 * (c + 1) + jitter(rng), 0.0, 0.0});
        pts.push_back({200.0, 0, 0});
        pts.push_back({300.0, 0, 0});
        const auto kc = kcenter_outliers(pts, 5, T / 12.0, norm);
        for (std::size_t i = 0; i < 30; ++i) {
            REQUIRE(kc.assignment[i] >= 0);
            const auto center = kc.centers[static_cast<std::size_t>(kc.assignment[i])];
            CHECK(feature_distance(pts[i], pts[center], norm) <= T / 4.0 + 1e-12);
        }
        CHECK(kc.assignment[30] == -1);
        CHECK(kc.assignment[31] == -1);
    }
}

TEST_CASE("build_codewords rules") {
    HeavySet heavy;
    heavy.entries = {{0, 5, {}}, {1, 7, {}}, {2, 9, {}}, {2, 4, {}}};
    ClusterPartition part;
    part.clusters = {{0, 1, 2, 3}};
    const auto words = build_codewords(part, heavy, 4, 2);
    REQUIRE(words.size() == 2);
    CHECK(words[0].symbols[0] == std::optional<Symbol>(5));
    CHECK(words[0].symbols[2] == std::optional<Symbol>(4));
    CHECK_FALSE(words[0].symbols[3].has_value());
    CHECK(words[1].erasures() == 4);
}

TEST_CASE("recover on small noiseless scenes") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        TheoryTrialConfig cfg;
        cfg.model = ModelConfig{128, 2, 8, 8};
        cfg.q = 256;
        cfg.s = 10;
        cfg.r = 2;
        cfg.noise_fraction = 0.0;
        const auto inst = make_theory_instance(cfg, seed, 0);
        const auto res = recover(inst.sketch, inst.plan, 8, inst.T, inst.norm);
        CHECK(res.decodes.size() == 8);
        const auto diag = diagnose(inst.sketch, inst.plan, inst.clean, inst.grid, 8, inst.T, inst.norm);
        // Every fully contained object is found when nothing collides.
        bool collision_free = true;
        std::set<std::pair<unsigned, Symbol>> used;
        for (auto c : inst.grid.touched_cells) {
            const auto sym = inst.plan.symbols(c);
            for (unsigned i = 0; i < sym.size(); ++i) collision_free &= used.insert({i, sym[i]}).second;
        }
        if (collision_free) {
            CHECK(diag.correct == inst.grid.full_cells.size());
            CHECK(diag.preserved == inst.plan.rows() * inst.grid.full_cells.size());
        }
        for (const auto& [cell, mult] : res.cells) CHECK(cell < inst.plan.cells());
    }
}

TEST_CASE("clusters respect the T/2 diameter and partition the heavy set") {
    TheoryTrialConfig cfg;
    cfg.model = ModelConfig{256, 2, 8, 32};
    cfg.q = 256;
    cfg.s = 10;
    cfg.r = 2;
    for (std::uint64_t t = 0; t < 5; ++t) {
        const auto inst = make_theory_instance(cfg, 17, t);
        const auto heavy = find_heavy(inst.sketch, inst.T, inst.norm);
        const auto part = cluster_heavy(heavy, 32, inst.T, inst.norm, 1.0);
        std::size_t total = part.outliers.size();
        for (const auto& c : part.clusters) {
            total += c.size();
            CHECK(diameter(c, heavy, inst.norm) <= inst.T / 2.0 + 1e-12);
        }
        CHECK(total == heavy.entries.size());
    }
}

TEST_CASE("recover on an empty image yields no valid cells") {
    Rng rng(4);
    const auto plan = build_plan(plan_config(64, 8), rng);
    const auto res = recover(measure(plan, Image(64)), plan, 8, 0.1, FeatureNorm{});
    CHECK(res.cells.empty());
    CHECK(res.decodes.size() == 8);
    std::ostringstream csv;
    write_recovery_csv(csv, res);
    CHECK(csv.str().starts_with("cluster,cell,valid,errors,erasures\n0,"));
}

TEST_CASE("estimate_cell_contents takes the median over rows") {
    Rng rng(5);
    PlanConfig pc = plan_config(64, 8);
    pc.s = 5;
    pc.q = 1024;
    pc.r = 1;
    const auto plan = build_plan(pc, rng);
    Image img(64);
    const auto cell = plan.grid().cell_of(30, 30);
    img.at(30, 30) = 4.0;
    Sketch sk = measure(plan, img);
    const Image truth = plan.grid().extract(img, cell);
    CHECK(estimate_cell_contents(sk, plan, cell) == truth);
    const auto sym = plan.symbols(cell);
    for (double& v : sk.bucket(2, sym[2])) v += 100.0;
    CHECK(estimate_cell_contents(sk, plan, cell) == truth);
}

TEST_CASE("lemma quantities with derived parameters and point objects") {
    // One-pixel objects are never cut by the grid, so S = S' and the bounds
    // apply with k = |S|.
    TheoryTrialConfig cfg;
    cfg.model = ModelConfig{128, 1, 8, 8};
    const Constants c;
    const auto params = resolve_plan_parameters(cfg.plan_config());
    REQUIRE(params.derived);
    const double sk = params.s * 8.0;
    int preserved_ok = 0, rp_ok = 0, err_ok = 0, decoded_ok = 0;
    const int trials = 16;
    for (int t = 0; t < trials; ++t) {
        const auto r = run_theory_trial(cfg, 99, static_cast<std::uint64_t>(t));
        const auto& d = r.diagnostics;
        REQUIRE(d.full_cells == 8);
        preserved_ok += d.preserved >= (1.0 - c.beta()) * sk;
        rp_ok += d.heavy_not_preserved <= c.delta() * sk;
        err_ok += d.errors <= 2.0 * c.delta() * sk && d.erasures <= (c.delta() + c.beta()) * sk;
        decoded_ok += r.success(8);
    }
    CHECK(preserved_ok >= trials * 7 / 8);
    CHECK(rp_ok >= trials * 3 / 4);
    CHECK(err_ok >= trials * 3 / 4);
    CHECK(decoded_ok >= trials * 3 / 4);
}

}
