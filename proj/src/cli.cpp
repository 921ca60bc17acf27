#include "locsketch/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "locsketch/codes.hpp"
#include "locsketch/measurement.hpp"
#include "locsketch/modular.hpp"
#include "locsketch/recovery.hpp"

namespace locsketch {

namespace fs = std::filesystem;

TheoryTrialConfig theory_config_from(const Config& c) {
    TheoryTrialConfig t;
    t.model.n = c.get_uint("model.n");
    t.model.w = c.get_uint("model.w");
    t.model.w_prime = c.get_uint("model.w_prime");
    t.model.k = c.get_uint("model.k");
    t.kind = parse_code_kind(c.get_string("code.kind"));
    t.constants.alpha = c.get_double("constants.alpha", t.constants.alpha);
    t.constants.gamma = c.get_double("constants.gamma", t.constants.gamma);
    t.constants.eta = c.get_double("constants.eta", t.constants.eta);
    t.model.alpha = t.constants.alpha;
    t.model.gamma = t.constants.gamma;
    const bool any = c.has("code.q") || c.has("code.s") || c.has("code.r");
    if (any) {
        t.q = c.get_uint("code.q");
        t.s = static_cast<unsigned>(c.get_uint("code.s"));
        t.r = static_cast<unsigned>(c.get_uint("code.r"));
    }
    t.log_factor = c.get_double("code.log_factor", t.log_factor);
    t.first_mass = c.get_double("model.first_mass", t.first_mass);
    t.mass_step = c.get_double("model.mass_step", t.mass_step);
    t.noise_fraction = c.get_double("model.noise_fraction", t.noise_fraction);
    return t;
}

AduafConfig aduaf_config_from(const Config& c) {
    AduafConfig a;
    a.n = c.get_uint("patch.n", a.n);
    a.p1 = c.get_uint("aduaf.p1", a.p1);
    a.p2 = c.get_uint("aduaf.p2", a.p2);
    a.cell_w = c.get_uint("aduaf.cell_w", a.cell_w);
    a.cells_per_fold = c.get_uint("aduaf.cells_per_fold", a.cells_per_fold);
    a.max_pairs = c.get_uint("aduaf.max_pairs", a.max_pairs);
    a.overlap_limit = c.get_uint("aduaf.overlap_limit", a.overlap_limit);
    a.mass_tol = c.get_double("aduaf.mass_tol", a.mass_tol);
    a.centroid_tol = c.get_double("aduaf.centroid_tol", a.centroid_tol);
    a.merge_radius = c.get_double("aduaf.merge_radius", a.merge_radius);
    return a;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> parse_prime_pairs(const std::string& text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("experiment.prime_pairs: expected p1:p2 entries, got '" + item + "'");
        }
        out.emplace_back(parse_uint(item.substr(0, colon), "experiment.prime_pairs"),
                         parse_uint(item.substr(colon + 1), "experiment.prime_pairs"));
    }
    if (out.empty()) throw ConfigError("experiment.prime_pairs: empty list");
    return out;
}

}  // namespace

ExperimentConfig experiment_config_from(const Config& c) {
    ExperimentConfig e;
    e.patch.fov = c.get_double("patch.fov", e.patch.fov);
    e.patch.n = c.get_uint("patch.n", e.patch.n);
    e.patch.poisson = c.get_bool("patch.poisson", e.patch.poisson);
    e.patch.psf_sigma = c.get_double("patch.psf_sigma", e.patch.psf_sigma);
    e.patch.declination_cut = c.get_double("patch.declination_cut", e.patch.declination_cut);
    e.sigmas = c.get_doubles("experiment.sigmas", e.sigmas);
    if (c.has("experiment.prime_pairs")) e.prime_pairs = parse_prime_pairs(c.get_string("experiment.prime_pairs"));
    e.trials = c.get_uint("experiment.trials", e.trials);
    e.match_tolerance_px = c.get_double("experiment.match_tolerance_px", e.match_tolerance_px);
    e.min_match_stars = static_cast<unsigned>(c.get_uint("experiment.min_match_stars", e.min_match_stars));
    e.truth_radius_px = c.get_double("experiment.truth_radius_px", e.truth_radius_px);
    e.jobs = static_cast<unsigned>(c.get_uint("experiment.jobs", e.jobs));
    e.timing = c.get_bool("experiment.timing", e.timing);
    e.aduaf = aduaf_config_from(c);
    return e;
}

namespace {

struct Context {
    std::ostream& out;
    std::ostream& err;
};

Config load_config(const std::string& path) {
    if (!path.empty()) return Config::load(path);
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) return Config::load(env);
    return Config{};
}

/// --config plus free-form --set key=value overrides; specific flags register
/// their own keys through `flag`.
struct Overrides {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "config file (default: $LOCSKETCH_CONFIG)");
        app->add_option("--set", sets, "override a config key, key=value (repeatable)");
    }
    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        app->add_option_function<std::string>(name, [this, key](const std::string& v) { flags[key] = v; }, help);
    }
    Config resolve() const {
        Config cfg = load_config(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
            cfg.set(s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto& [k, v] : flags) cfg.set(k, v);
        return cfg;
    }
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read '" + path.string() + "'");
    return f;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return s.str();
}

/// Lines "# key = value" describing the resolved run, shared by stdout and CSV headers.
std::vector<std::pair<std::string, std::string>> theory_echo(const TheoryTrialConfig& t, const PlanParameters& p,
                                                             std::uint64_t seed) {
    const auto& c = t.constants;
    return {{"seed", std::to_string(seed)},
            {"n", std::to_string(t.model.n)},
            {"w", std::to_string(t.model.w)},
            {"w_prime", std::to_string(t.model.w_prime)},
            {"k", std::to_string(t.model.k)},
            {"alpha", fmt(c.alpha)},
            {"gamma", fmt(c.gamma)},
            {"eta", fmt(c.eta)},
            {"beta", fmt(c.beta())},
            {"delta", fmt(c.delta())},
            {"distance_fraction", fmt(c.distance_fraction())},
            {"code", to_string(t.kind)},
            {"q", std::to_string(p.q)},
            {"s", std::to_string(p.s)},
            {"r", std::to_string(p.r)},
            {"parameters", p.derived ? "derived" : "explicit"},
            {"noise_fraction", fmt(t.noise_fraction)}};
}

void echo(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& lines) {
    for (const auto& [k, v] : lines) out << "# " << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------

int cmd_gen_catalog(const Context& ctx, std::uint64_t seed, std::uint64_t count, const std::string& exponent_text,
                    const std::string& out_path) {
    const double exponent = parse_double(exponent_text, "--exponent");
    if (count == 0) throw ConfigError("--count must be positive");
    Rng rng(seed);
    const StarCatalog cat = generate_catalog(rng, count, exponent);
    auto f = open_out(out_path);
    write_catalog_csv(f, cat);
    ctx.out << "wrote " << cat.stars.size() << " stars to " << out_path << '\n';
    return kExitOk;
}

struct TheoryArgs {
    std::uint64_t seed = 0;
    std::uint64_t trials = 1;
    std::string out_dir = ".";
    bool explicit_matrix = false;
};

int cmd_theory_trial(const Context& ctx, const Config& cfg, const TheoryArgs& args) {
    const TheoryTrialConfig t = theory_config_from(cfg);
    const PlanParameters params = resolve_plan_parameters(t.plan_config());
    const auto header = theory_echo(t, params, args.seed);
    echo(ctx.out, header);

    const fs::path dir(args.out_dir);
    auto trials_csv = open_out(dir / "trials.csv");
    echo(trials_csv, header);
    trials_csv << "trial,T,noise_norm,full_cells,touched_cells,preserved,heavy,heavy_not_preserved,outliers,"
                  "errors,erasures,correct,success\n";
    std::size_t successes = 0;
    for (std::uint64_t trial = 0; trial < args.trials; ++trial) {
        const TheoryInstance inst = make_theory_instance(t, args.seed, trial);
        const Diagnostics d =
            diagnose(inst.sketch, inst.plan, inst.clean, inst.grid, t.model.k, inst.T, inst.norm, t.constants);
        const bool ok = 2 * d.correct >= t.model.k;
        successes += ok ? 1 : 0;
        trials_csv << trial << ',' << fmt(inst.T) << ',' << fmt(inst.noise_norm) << ',' << d.full_cells << ','
                   << d.touched_cells << ',' << d.preserved << ',' << d.heavy << ',' << d.heavy_not_preserved << ','
                   << d.outliers << ',' << d.errors << ',' << d.erasures << ',' << d.correct << ',' << (ok ? 1 : 0)
                   << '\n';
        if (trial == 0) {
            auto sk = open_out(dir / "sketch.bin");
            write_sketch_binary(sk, inst.sketch);
            auto pl = open_out(dir / "placement.csv");
            write_placement_csv(pl, inst.placement);
            auto rc = open_out(dir / "recovery.csv");
            write_recovery_csv(rc, recover(inst.sketch, inst.plan, t.model.k, inst.T, inst.norm, t.constants));
            save_image(dir / "observed.bin", inst.observed);
            if (args.explicit_matrix) {
                auto mx = open_out(dir / "explicit_matrix.csv");
                write_explicit_matrix(mx, inst.plan);
            }
        }
    }
    ctx.out << "measurements = " << measurement_count(rebuild_theory_plan(t, args.seed, 0)) << '\n';
    ctx.out << "successes = " << successes << " / " << args.trials << '\n';
    return kExitOk;
}

struct ExperimentArgs {
    std::uint64_t seed = 0;
    std::string catalog;
    std::string out = "aduaf_results.csv";
};

int cmd_aduaf_experiment(const Context& ctx, const Config& cfg, const ExperimentArgs& args) {
    ExperimentConfig e = experiment_config_from(cfg);
    e.seed = args.seed;
    for (const auto& [p1, p2] : e.prime_pairs) FoldPlan::make(p1, p2, e.patch.n);
    {
        AduafConfig check = e.aduaf;
        check.n = e.patch.n;
        check.p1 = e.prime_pairs.front().first;
        check.p2 = e.prime_pairs.front().second;
        check.validate();
    }
    e.patch.validate();

    StarCatalog catalog;
    if (!args.catalog.empty()) {
        catalog = load_catalog(args.catalog);
    } else {
        Rng rng = substream(args.seed, 0xCA7A1061ULL);
        catalog = generate_catalog(rng, cfg.get_uint("catalog.count", 259000),
                                   cfg.get_double("catalog.exponent", -1.17));
    }
    const StarCatalog subset =
        build_subset(catalog, cfg.get_double("catalog.subset_radius", e.patch.fov), cfg.get_uint("catalog.subset_top", 10));
    const PairDatabase db = build_pair_db(subset, e.patch.fov);
    e.patch.photon_scale = photon_scale_for_median(subset, cfg.get_double("patch.median_photons", 3000.0));

    const std::vector<std::pair<std::string, std::string>> header{
        {"seed", std::to_string(e.seed)},
        {"catalog_stars", std::to_string(catalog.stars.size())},
        {"subset_stars", std::to_string(subset.stars.size())},
        {"database_pairs", std::to_string(db.pairs().size())},
        {"photon_scale", fmt(e.patch.photon_scale)},
        {"n", std::to_string(e.patch.n)},
        {"fov", fmt(e.patch.fov)},
        {"cells_per_fold", std::to_string(e.aduaf.cells_per_fold)},
        {"max_pairs", std::to_string(e.aduaf.max_pairs)},
        {"overlap_limit", std::to_string(e.aduaf.overlap_limit)},
        {"mass_tol", fmt(e.aduaf.mass_tol)},
        {"centroid_tol", fmt(e.aduaf.centroid_tol)},
        {"min_match_stars", std::to_string(e.min_match_stars)},
        {"trials", std::to_string(e.trials)}};
    echo(ctx.out, header);

    const auto rows = run_experiment(catalog, db, e);
    auto f = open_out(args.out);
    echo(f, header);
    write_experiment_csv(f, rows);
    write_experiment_csv(ctx.out, rows);
    return kExitOk;
}

int cmd_fold(const Context& ctx, const std::string& in, std::size_t p1, std::size_t p2, const std::string& out_dir) {
    const Image image = load_image(in);
    const FoldPlan plan = FoldPlan::make(p1, p2, image.rows());
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    save_image(dir / "z1.bin", fold2d(image, plan, 1));
    save_image(dir / "z2.bin", fold2d(image, plan, 2));
    ctx.out << "folded " << image.rows() << "x" << image.cols() << " into " << p1 << "x" << p1 << " and " << p2 << "x"
            << p2 << " (" << measurement_count(plan) << " measurements)\n";
    return kExitOk;
}

struct RecoverArgs {
    std::string sketch;
    std::string z1, z2;
    std::string ground_truth;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::uint64_t trial = 0;
    std::string out = "recovery.csv";
};

int cmd_recover(const Context& ctx, const Config& cfg, const RecoverArgs& args) {
    if (!args.z1.empty() || !args.z2.empty()) {
        if (args.z1.empty() || args.z2.empty()) throw ConfigError("--z1 and --z2 go together");
        AduafConfig a = aduaf_config_from(cfg);
        const Image z1 = load_image(args.z1);
        const Image z2 = load_image(args.z2);
        a.p1 = z1.rows();
        a.p2 = z2.rows();
        AduafStats stats;
        const auto stars = aduaf_recover(z1, z2, a, &stats);
        auto f = open_out(args.out);
        write_stars_csv(f, stars);
        ctx.out << "picked " << stats.picked1 << " + " << stats.picked2 << " cells, " << stats.pairs << " pairs, "
                << stats.ghosts << " ghosts, " << stats.merged << " merged, " << stars.size() << " stars\n";
        return kExitOk;
    }
    if (args.sketch.empty()) throw ConfigError("recover needs --sketch or --z1/--z2");
    if (!args.seed_given) throw ConfigError("recover --sketch needs the --seed the sketch was made with");
    const TheoryTrialConfig t = theory_config_from(cfg);
    const MeasurementPlan plan = rebuild_theory_plan(t, args.seed, args.trial);
    auto in = open_in(args.sketch);
    const Sketch sketch = read_sketch_binary(in);
    const auto templates = scaled_templates(t.model.w, t.model.k, t.first_mass, t.mass_step);
    const FeatureNorm norm = default_norm(templates);
    const double T = distinguishability_threshold(templates, t.model.w_prime, norm);
    const RecoveryResult res = recover(sketch, plan, t.model.k, T, norm, t.constants);
    auto f = open_out(args.out);
    write_recovery_csv(f, res);
    ctx.out << "unique cells = " << res.cells.size() << ", heavy = " << res.heavy << ", outliers = " << res.outliers
            << (res.outlier_budget_exceeded ? " (over budget)" : "") << '\n';
    if (!args.ground_truth.empty()) {
        auto gt = open_in(args.ground_truth);
        const Placement placement = read_placement_csv(gt);
        if (placement.translations.size() != t.model.k) throw ConfigError("ground truth holds a different k");
        GridView grid = plan.grid();
        classify_cells(grid, placement, t.model.w);
        const Image clean = render(t.model, templates, placement);
        const Diagnostics d = diagnose(sketch, plan, clean, grid, t.model.k, T, norm, t.constants);
        ctx.out << "full_cells = " << d.full_cells << ", touched_cells = " << d.touched_cells
                << ", preserved = " << d.preserved << ", heavy_not_preserved = " << d.heavy_not_preserved
                << ", errors = " << d.errors << ", erasures = " << d.erasures << ", correct = " << d.correct << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

using Check = std::pair<const char*, std::function<bool()>>;

int cmd_selftest(const Context& ctx) {
    const std::vector<Check> checks{
        {"affine hash pairwise independence (P=13)",
         [] {
             const std::uint64_t P = 13;
             for (std::uint64_t x1 = 0; x1 < P; ++x1) {
                 for (std::uint64_t x2 = x1 + 1; x2 < P; x2 += 5) {
                     for (std::uint64_t y1 = 0; y1 < P; ++y1) {
                         for (std::uint64_t y2 = 0; y2 < P; ++y2) {
                             unsigned hits = 0;
                             for (std::uint64_t a = 0; a < P; ++a)
                                 for (std::uint64_t b = 0; b < P; ++b)
                                     hits += affine_hash(a, b, P, x1) == y1 && affine_hash(a, b, P, x2) == y2;
                             if (hits != 1) return false;
                         }
                     }
                 }
             }
             return true;
         }},
        {"Reed-Solomon corrects one error",
         [] {
             const auto spec = RsCodeSpec::make(5, 2, 5);
             auto word = rs_encode(spec, 11);
             word[2] = (word[2] + 1) % 5;
             return rs_decode(spec, word) == std::optional<std::uint64_t>(11);
         }},
        {"CRT reconstruction",
         [] {
             const std::vector<Residue> r{{2, 5}, {3, 7}};
             return crt_reconstruct(r) == 17;
         }},
        {"independent code round trip",
         [] {
             Rng rng(1);
             const auto code = sample_independent_code(CodeKind::Crt, 600, 6, 37, 2, rng);
             for (std::uint64_t c = 0; c < 600; c += 7) {
                 Codeword w;
                 for (auto s : code.encode(c)) w.symbols.emplace_back(s);
                 if (code.decode(w) != std::optional<std::uint64_t>(c)) return false;
             }
             return true;
         }},
        {"fold and reconstruct a single star",
         [] {
             Image img(800);
             img.at(417, 23) = 1000.0;
             AduafConfig a;
             const auto stars = aduaf_recover(fold2d(img, a.p1), fold2d(img, a.p2), a);
             return !stars.empty() && std::abs(stars[0].x - 417.5) < 0.5 && std::abs(stars[0].y - 23.5) < 0.5;
         }},
    };
    bool all = true;
    for (const auto& [name, fn] : checks) {
        const bool ok = fn();
        all = all && ok;
        ctx.out << (ok ? "PASS " : "FAIL ") << name << '\n';
    }
    return all ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const Context ctx{out, err};
    CLI::App app{"Sketching and recovery of images with few local objects"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto* gen = app.add_subcommand("gen-catalog", "synthetic power-law star catalog as CSV");
    std::uint64_t gen_seed = 0, gen_count = 259000;
    std::string gen_exponent = "-1.17", gen_out = "catalog.csv";
    gen->add_option("--seed", gen_seed, "random seed")->required();
    gen->add_option("--count", gen_count, "number of stars");
    gen->add_option("--exponent", gen_exponent, "mass power-law exponent");
    gen->add_option("--out", gen_out, "output CSV");
    gen->callback([&] { action = [&] { return cmd_gen_catalog(ctx, gen_seed, gen_count, gen_exponent, gen_out); }; });

    auto* theory = app.add_subcommand("theory-trial", "model -> plan -> measure -> recover -> diagnose");
    Overrides theory_ov;
    TheoryArgs theory_args;
    theory_ov.attach(theory);
    theory->add_option("--seed", theory_args.seed, "random seed")->required();
    theory->add_option("--trials", theory_args.trials, "number of trials");
    theory->add_option("--out-dir", theory_args.out_dir, "output directory");
    theory->add_flag("--explicit-matrix", theory_args.explicit_matrix, "also write the 0/1 matrix of trial 0");
    theory_ov.flag(theory, "--n", "model.n", "image side");
    theory_ov.flag(theory, "--w", "model.w", "object side");
    theory_ov.flag(theory, "--w-prime", "model.w_prime", "cell side");
    theory_ov.flag(theory, "--k", "model.k", "object count");
    theory_ov.flag(theory, "--code", "code.kind", "rs or crt");
    theory_ov.flag(theory, "--q", "code.q", "alphabet lower bound");
    theory_ov.flag(theory, "--s", "code.s", "column sparsity");
    theory_ov.flag(theory, "--r", "code.r", "message length");
    theory_ov.flag(theory, "--alpha", "constants.alpha", "object fraction cut by the grid");
    theory_ov.flag(theory, "--gamma", "constants.gamma", "noise constant");
    theory_ov.flag(theory, "--eta", "constants.eta", "collision constant");
    theory_ov.flag(theory, "--noise-fraction", "model.noise_fraction", "fraction of the noise budget applied");
    theory->callback([&] { action = [&] { return cmd_theory_trial(ctx, theory_ov.resolve(), theory_args); }; });

    auto* exp = app.add_subcommand("aduaf-experiment", "fold / recover / identify sweep over noise levels");
    Overrides exp_ov;
    ExperimentArgs exp_args;
    exp_ov.attach(exp);
    exp->add_option("--seed", exp_args.seed, "random seed")->required();
    exp->add_option("--catalog", exp_args.catalog, "catalog CSV (default: generated from the seed)");
    exp->add_option("--out", exp_args.out, "results CSV");
    exp_ov.flag(exp, "--trials", "experiment.trials", "trials per grid point");
    exp_ov.flag(exp, "--jobs", "experiment.jobs", "worker threads");
    exp_ov.flag(exp, "--sigmas", "experiment.sigmas", "comma-separated Gaussian noise levels");
    exp_ov.flag(exp, "--prime-pairs", "experiment.prime_pairs", "comma-separated p1:p2 entries");
    exp_ov.flag(exp, "--cells", "aduaf.cells_per_fold", "cells picked per fold");
    exp_ov.flag(exp, "--pairs", "aduaf.max_pairs", "pairs matched");
    exp_ov.flag(exp, "--catalog-count", "catalog.count", "stars in the generated catalog");
    exp->add_flag_callback("--timing", [&exp_ov] { exp_ov.flags["experiment.timing"] = "true"; },
                           "record mean runtime per trial");
    exp->callback([&] { action = [&] { return cmd_aduaf_experiment(ctx, exp_ov.resolve(), exp_args); }; });

    auto* fold = app.add_subcommand("fold", "fold a binary image modulo two coprime sides");
    std::string fold_in, fold_out = ".";
    std::size_t fold_p1 = 0, fold_p2 = 0;
    fold->add_option("--in", fold_in, "square image, flat binary")->required();
    fold->add_option("--p1", fold_p1, "first fold side")->required();
    fold->add_option("--p2", fold_p2, "second fold side")->required();
    fold->add_option("--out-dir", fold_out, "writes z1.bin and z2.bin");
    fold->callback([&] { action = [&] { return cmd_fold(ctx, fold_in, fold_p1, fold_p2, fold_out); }; });

    auto* rec = app.add_subcommand("recover", "recover from a sketch (--sketch) or from two folds (--z1/--z2)");
    Overrides rec_ov;
    RecoverArgs rec_args;
    rec_ov.attach(rec);
    rec->add_option("--sketch", rec_args.sketch, "sketch binary written by theory-trial");
    rec->add_option("--z1", rec_args.z1, "first fold, flat binary");
    rec->add_option("--z2", rec_args.z2, "second fold, flat binary");
    rec->add_option("--ground-truth", rec_args.ground_truth, "placement CSV for diagnostics");
    rec->add_option_function<std::uint64_t>(
        "--seed", [&rec_args](std::uint64_t v) { rec_args.seed = v, rec_args.seed_given = true; }, "seed of the sketch");
    rec->add_option("--trial", rec_args.trial, "trial index of the sketch");
    rec->add_option("--out", rec_args.out, "output CSV");
    rec->callback([&] { action = [&] { return cmd_recover(ctx, rec_ov.resolve(), rec_args); }; });

    auto* self = app.add_subcommand("selftest", "quick internal consistency checks");
    self->callback([&] { action = [&] { return cmd_selftest(ctx); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    try {
        return action();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace locsketch
