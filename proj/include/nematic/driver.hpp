#pragma once

#include <string>
#include <vector>

#include "nematic/config.hpp"
#include "nematic/emit.hpp"

namespace nematic {

struct RunResult {
  std::vector<std::string> files;  // in the order written
  Json summary;                    // what the main JSON output holds
};

// Runs one subcommand and writes its outputs under cfg.out_dir.
RunResult execute(const RunConfig& cfg);

// Unit vector drawn from the seed; used to orient the energy perturbation.
Vec3 seeded_axis(unsigned long seed);

}  // namespace nematic
