// Experiment stages behind the `ace` command line tool.
//
// Output layout under the run directory:
//   logs/events.tsv  logs/schema.tsv
//   datasets/ice.txt  datasets/ace.txt
//   models/ice.model  models/ace.model
//   reports/dataset_stats.csv  reports/gain_ice.csv  reports/gain_ace.csv
//   reports/comparison.csv  reports/comparison.txt
//   reports/figure1.csv  reports/weight_shift.csv  reports/weight_shift_mc.csv
//   reports/monte_carlo.csv  reports/theory_checks.txt  reports/summary.txt
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ace/analysis.hpp"
#include "ace/config.hpp"
#include "ace/core.hpp"
#include "ace/simulator.hpp"

namespace ace::cli {

struct Layout {
  std::filesystem::path events, schema;
  std::filesystem::path ice_dataset, ace_dataset;
  std::filesystem::path ice_model, ace_model;
  std::filesystem::path dataset_stats, comparison_csv, comparison_txt;
  std::filesystem::path figure1, weight_shift, weight_shift_mc, monte_carlo, theory_checks;
  std::filesystem::path summary;

  std::filesystem::path dataset(DatasetKind kind) const {
    return kind == DatasetKind::kIce ? ice_dataset : ace_dataset;
  }
  std::filesystem::path model(DatasetKind kind) const {
    return kind == DatasetKind::kIce ? ice_model : ace_model;
  }
  std::filesystem::path gain_report(DatasetKind kind) const;

  std::filesystem::path root;
};

Layout layout_for(const std::filesystem::path& out);

struct Warmup {
  sim::World world;
  std::vector<SearchEvent> events;
};

/// num_days of traffic under the bootstrap ranker from a fresh world.
Warmup run_warmup(const RunConfig& config);

void cmd_simulate(const RunConfig& config, std::ostream& log);

curation::DatasetStats cmd_curate(const std::filesystem::path& log_path, DatasetKind kind,
                                  const RunConfig& config,
                                  const std::filesystem::path& dataset_out, std::ostream& log);

rank::GBDTModel cmd_train(const std::filesystem::path& dataset_path, const RunConfig& config,
                          const std::filesystem::path& model_out, std::ostream& log);

/// Offline new-product share and NDCG on held-out days, then the simulated
/// A/B test, both starting where the warm-up ends.
analysis::ComparisonReport evaluate_models(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                           const Warmup& warmup, const RunConfig& config);

analysis::ComparisonReport cmd_eval(const std::filesystem::path& ice_model,
                                    const std::filesystem::path& ace_model,
                                    const RunConfig& config, std::ostream& log);

struct TheoryOutcome {
  bool passed = true;
  std::vector<std::string> checks;  // one "PASS|FAIL name: detail" line each
};

TheoryOutcome cmd_theory(const RunConfig& config, std::ostream& log);

/// Runs every stage and writes reports/summary.txt. Returns the process exit
/// code: 0 when all theory gates pass.
int cmd_pipeline(const RunConfig& config, std::ostream& log);

}  // namespace ace::cli
