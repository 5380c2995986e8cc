// Run configuration: flat `section.key = value` text with a default per key.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ace/curation.hpp"
#include "ace/ranker.hpp"
#include "ace/simulator.hpp"

namespace ace::cli {

struct EvalConfig {
  int k = 16;
  int offline_age_days = 7;
  int offline_days = 7;
  int ab_age_days = 3;
  int horizon_days = 14;
};

struct TheoryConfig {
  std::vector<int> m_values{1, 2, 5, 10, 20};
  double grid_step = 1e-3;
  std::size_t sample_count = 1'000'000;
};

/// Section seeds are not configured directly: sim, train and theory seeds are
/// derived from `seed` with tags "sim", "train" and "theory".
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  sim::SimConfig sim;
  curation::AceConfig curation;
  rank::TrainConfig train;
  EvalConfig eval;
  TheoryConfig theory;
};

/// Applies one `key = value` assignment; throws Error on unknown keys or
/// unparsable values.
void set_value(RunConfig& config, const std::string& key, const std::string& value);

/// Parses config text (blank lines and `#` comments allowed) over defaults.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Validates every section and fills in the derived section seeds.
RunConfig finalize(RunConfig config);

/// Every key with its current value, in documentation order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& config);

}  // namespace ace::cli
