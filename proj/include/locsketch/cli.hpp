#pragma once

#include <iosfwd>

#include "locsketch/aduaf.hpp"
#include "locsketch/config.hpp"
#include "locsketch/pipeline.hpp"
#include "locsketch/startracker.hpp"

namespace locsketch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Typed views of a loaded config. Missing optional keys keep library defaults.
/// The theory trial requires model.n, model.w, model.w_prime, model.k and code.kind.
TheoryTrialConfig theory_config_from(const Config& config);
AduafConfig aduaf_config_from(const Config& config);
ExperimentConfig experiment_config_from(const Config& config);

/// `locsketch <subcommand> ...`; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace locsketch
