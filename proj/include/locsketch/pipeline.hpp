#pragma once

// One end-to-end trial of the general scheme: place objects, sample the plan,
// add noise at a fixed fraction of the budget, measure, recover, diagnose.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "locsketch/image_model.hpp"
#include "locsketch/measurement.hpp"
#include "locsketch/recovery.hpp"

namespace locsketch {

struct TheoryTrialConfig {
    ModelConfig model{256, 2, 8, 32};
    CodeKind kind = CodeKind::Crt;
    std::optional<std::uint64_t> q;
    std::optional<unsigned> s;
    std::optional<unsigned> r;
    Constants constants;
    double log_factor = 1.0;
    double first_mass = 10.0;  // object i has mass first_mass + i * mass_step
    double mass_step = 1.0;
    double noise_fraction = 0.5;  // ||mu||_F = noise_fraction * gamma * k * T; 0 means noiseless

    PlanConfig plan_config() const;
};

struct TheoryInstance {
    std::vector<ObjectTemplate> templates;
    FeatureNorm norm;
    double T = 0.0;
    Placement placement;
    Image clean;
    Image observed;
    double noise_norm = 0.0;  // ||mu||_F actually applied
    MeasurementPlan plan;
    GridView grid;  // the plan's grid, classified against the placement
    Sketch sketch;
};

/// Trial t draws the placement, the plan and the noise from three separate
/// substreams of `seed`, so the plan can be rebuilt on its own.
TheoryInstance make_theory_instance(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial);
MeasurementPlan rebuild_theory_plan(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial);

struct TheoryTrialResult {
    std::uint64_t trial = 0;
    double T = 0.0;
    double noise_norm = 0.0;
    Diagnostics diagnostics;
    RecoveryResult recovery;

    /// At least k/2 cells of S recovered.
    bool success(std::size_t k) const { return 2 * diagnostics.correct >= k; }
};

TheoryTrialResult run_theory_trial(const TheoryTrialConfig& config, std::uint64_t seed, std::uint64_t trial);

/// index,x,y
void write_placement_csv(std::ostream& out, const Placement& placement);
/// Throws std::runtime_error naming the offending line.
Placement read_placement_csv(std::istream& in);

}  // namespace locsketch
