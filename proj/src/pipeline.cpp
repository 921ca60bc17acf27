#include "locsketch/pipeline.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace locsketch {

PlanConfig TheoryTrialConfig::plan_config() const {
    PlanConfig pc;
    pc.n = model.n;
    pc.w_prime = model.w_prime;
    pc.k = model.k;
    pc.kind = kind;
    pc.constants = constants;
    pc.log_factor = log_factor;
    pc.q = q;
    pc.s = s;
    pc.r = r;
    return pc;
}

MeasurementPlan rebuild_theory_plan(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial) {
    Rng rng = substream(seed, 3 * trial + 1);
    return build_plan(config.plan_config(), rng);
}

TheoryInstance make_theory_instance(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial) {
    config.model.validate();
    if (!(config.noise_fraction >= 0.0)) throw std::invalid_argument("noise fraction must be non-negative");
    const std::size_t k = config.model.k;
    auto templates = scaled_templates(config.model.w, k, config.first_mass, config.mass_step);
    const FeatureNorm norm = default_norm(templates);
    const double T = distinguishability_threshold(templates, config.model.w_prime, norm);

    Rng place_rng = substream(seed, 3 * trial);
    Placement placement = place_objects(place_rng, config.model, k);
    Image clean = render(config.model, templates, placement);

    MeasurementPlan plan = rebuild_theory_plan(config, seed, trial);
    GridView grid = plan.grid();
    classify_cells(grid, placement, config.model.w);

    Image observed = clean;
    double applied = 0.0;
    if (config.noise_fraction > 0.0) {
        Rng noise_rng = substream(seed, 3 * trial + 2);
        const NoisyImage unit = add_noise(noise_rng, clean, NoiseSpec{1.0, false});
        const double raw = noise_budget(grid, unit.noise, norm);
        const double target = config.noise_fraction * config.model.gamma * static_cast<double>(k) * T;
        const double scale = raw > 0.0 ? target / raw : 0.0;
        auto px = observed.pixels();
        const auto mu = unit.noise.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) px[i] += scale * mu[i];
        applied = scale * raw;
    }
    Sketch sketch = measure(plan, observed);
    return TheoryInstance{std::move(templates), norm,          T,     std::move(placement), std::move(clean),
                          std::move(observed),  applied,       std::move(plan), std::move(grid), std::move(sketch)};
}

TheoryTrialResult run_theory_trial(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial) {
    const TheoryInstance inst = make_theory_instance(config, seed, trial);
    const std::size_t k = config.model.k;
    TheoryTrialResult out;
    out.trial = trial;
    out.T = inst.T;
    out.noise_norm = inst.noise_norm;
    out.diagnostics = diagnose(inst.sketch, inst.plan, inst.clean, inst.grid, k, inst.T, inst.norm, config.constants);
    out.recovery = recover(inst.sketch, inst.plan, k, inst.T, inst.norm, config.constants);
    return out;
}

void write_placement_csv(std::ostream& out, const Placement& placement) {
    out << "index,x,y\n";
    for (std::size_t i = 0; i < placement.translations.size(); ++i) {
        out << i << ',' << placement.translations[i].x << ',' << placement.translations[i].y << '\n';
    }
}

Placement read_placement_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "index,x,y") {
        throw std::runtime_error("placement CSV line 1: expected header index,x,y");
    }
    Placement placement;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t index = 0, x = 0, y = 0;
        char c1 = 0, c2 = 0;
        if (!(row >> index >> c1 >> x >> c2 >> y) || c1 != ',' || c2 != ',' ||
            index != placement.translations.size()) {
            throw std::runtime_error("placement CSV line " + std::to_string(lineno) + ": malformed row");
        }
        placement.translations.push_back({x, y});
    }
    return placement;
}

}  // namespace locsketch
