#pragma once

// Canned experiments: each runs a self-contained study, writes CSV/JSON
// artifacts into an output directory, and reports an overall pass flag for
// whatever internal consistency checks it carries.  Every experiment is
// deterministic in (seed, config) and independent of the thread count.
//
//   smoke            fast end-to-end exercise of walk, Green, and field
//   thick-2d         planar thick points: max statistic and level counts
//   thick-hd         transient thick points: nu/mu measures and maxima
//   isoradial-slope  potential slope across isoradial families
//   eisenbaum        tilted-field identity harness
//   ray-knight       second Ray-Knight harness plus domination check
//   green-audit      structural margins for a requested domain

#include <cstdint>
#include <string>
#include <vector>

#include "ltlab/config.hpp"
#include "vendor/json.hpp"

namespace ltlab {

struct ExperimentResult {
  std::string id;
  bool pass = false;
  std::vector<std::string> outputs;  // files written, relative to out_dir
  nlohmann::json summary;
};

const std::vector<std::string>& experiment_ids();

// Runs `id` with its keys from `cfg` (prefix matches the id), writing
// artifacts under `out_dir` (created if needed).  Throws ConfigError for
// unknown ids/keys and ResourceLimitError when a budget would be blown.
ExperimentResult run_experiment(const std::string& id, Config& cfg,
                                const std::string& out_dir, std::uint64_t seed,
                                int threads);

}  // namespace ltlab
