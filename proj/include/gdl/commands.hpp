#pragma once

#include <array>
#include <iosfwd>

#include "gdl/config.hpp"
#include "gdl/rip.hpp"

namespace gdl::cli {

// Subcommand bodies. Each reads inputs under the configured data directory,
// writes its artifacts plus a checksum manifest into the output directory,
// and reports progress on `log`. Errors surface as exceptions; main() maps
// them to exit codes.

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_train(const ExperimentConfig& cfg, std::ostream& log);
void cmd_infer(const ExperimentConfig& cfg, std::ostream& log);
void cmd_eval(const ExperimentConfig& cfg, std::ostream& log);
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
void cmd_render(const ExperimentConfig& cfg, std::ostream& log);

// The three slice responses of the configured setup, scaled to peak counts.
std::array<rip::RangeIntensityProfile, 3> build_rips(const ExperimentConfig& cfg);

}  // namespace gdl::cli
