#include "ace/commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "ace/curation.hpp"
#include "ace/io.hpp"
#include "ace/random.hpp"
#include "ace/ranker.hpp"
#include "ace/theory.hpp"

namespace ace::cli {

namespace fs = std::filesystem;

fs::path Layout::gain_report(DatasetKind kind) const {
  return root / "reports" / (kind == DatasetKind::kIce ? "gain_ice.csv" : "gain_ace.csv");
}

Layout layout_for(const fs::path& out) {
  Layout l;
  l.root = out;
  l.events = out / "logs" / "events.tsv";
  l.schema = out / "logs" / "schema.tsv";
  l.ice_dataset = out / "datasets" / "ice.txt";
  l.ace_dataset = out / "datasets" / "ace.txt";
  l.ice_model = out / "models" / "ice.model";
  l.ace_model = out / "models" / "ace.model";
  const auto reports = out / "reports";
  l.dataset_stats = reports / "dataset_stats.csv";
  l.comparison_csv = reports / "comparison.csv";
  l.comparison_txt = reports / "comparison.txt";
  l.figure1 = reports / "figure1.csv";
  l.weight_shift = reports / "weight_shift.csv";
  l.weight_shift_mc = reports / "weight_shift_mc.csv";
  l.monte_carlo = reports / "monte_carlo.csv";
  l.theory_checks = reports / "theory_checks.txt";
  l.summary = reports / "summary.txt";
  return l;
}

Warmup run_warmup(const RunConfig& config) {
  Warmup w{sim::init_world(config.sim), {}};
  const auto policy = sim::bootstrap_policy(w.world);
  w.events.reserve(static_cast<std::size_t>(config.sim.num_days) * config.sim.sessions_per_day);
  for (int day = 0; day < config.sim.num_days; ++day) {
    auto log = sim::simulate_day(w.world, day, policy);
    std::move(log.events.begin(), log.events.end(), std::back_inserter(w.events));
  }
  return w;
}

void cmd_simulate(const RunConfig& config, std::ostream& log) {
  const auto paths = layout_for(config.out);
  const auto warmup = run_warmup(config);
  std::size_t records = 0;
  for (const auto& ev : warmup.events) records += ev.results.size();
  io::save_schema(paths.schema, sim::default_schema());
  io::save_event_log(paths.events, sim::default_schema(), warmup.events);
  log << "simulate: " << warmup.events.size() << " events, " << records << " result records, "
      << warmup.world.catalog().size() << " products -> " << paths.events.string() << '\n';
}

curation::DatasetStats cmd_curate(const fs::path& log_path, DatasetKind kind,
                                  const RunConfig& config, const fs::path& dataset_out,
                                  std::ostream& log) {
  const auto paths = layout_for(config.out);
  const auto schema = io::load_schema(log_path.parent_path() / "schema.tsv");
  const auto events = io::load_event_log(log_path, schema);
  const auto ice = curation::build_ice(events, schema);
  const auto ace = curation::build_ace(events, schema, config.curation);
  const auto stats = curation::dataset_stats(events, ice, ace);
  const Dataset& chosen = kind == DatasetKind::kIce ? ice : ace;
  io::save_dataset(dataset_out, chosen);
  io::write_text_file(paths.dataset_stats, curation::stats_csv(stats));
  log << "curate: " << to_string(kind) << " dataset with " << chosen.instances.size()
      << " instances, " << chosen.item_count() << " items -> " << dataset_out.string() << '\n';
  return stats;
}

rank::GBDTModel cmd_train(const fs::path& dataset_path, const RunConfig& config,
                          const fs::path& model_out, std::ostream& log) {
  const auto paths = layout_for(config.out);
  const auto schema = sim::default_schema();
  const auto dataset = io::load_dataset(dataset_path, schema);
  if (dataset.instances.empty()) throw Error("train: dataset is empty");
  auto model = rank::fit(dataset, config.train);
  rank::save_model(model_out, model);
  io::write_text_file(paths.gain_report(dataset.kind), rank::gain_report_csv(model));
  log << "train: " << to_string(dataset.kind) << " model, " << model.trees.size()
      << " trees, behavioral gain share "
      << io::format_double(rank::behavioral_gain_share(model, schema)) << " -> "
      << model_out.string() << '\n';
  return model;
}

analysis::ComparisonReport evaluate_models(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                           const Warmup& warmup, const RunConfig& config) {
  const int start = config.sim.num_days;
  const auto offline = analysis::offline_new_product_eval(
      ice, ace, warmup.world, start, config.eval.offline_days, config.eval.k,
      config.eval.offline_age_days);
  auto report = analysis::simulated_ab_test(ice, ace, warmup.world, start,
                                            config.eval.horizon_days, config.eval.ab_age_days);
  const auto holdout = curation::build_ice(offline.events, ice.schema);
  report.ice.mean_ndcg = analysis::evaluate_model(ice, holdout, config.eval.k).mean_ndcg;
  report.ace.mean_ndcg = analysis::evaluate_model(ace, holdout, config.eval.k).mean_ndcg;
  report.ice.new_product_impression_share = offline.ice.share();
  report.ace.new_product_impression_share = offline.ace.share();
  report.config_echo = describe(config);
  report.seeds = {config.seed, config.sim.seed, config.train.seed};
  return report;
}

analysis::ComparisonReport cmd_eval(const fs::path& ice_model, const fs::path& ace_model,
                                    const RunConfig& config, std::ostream& log) {
  const auto paths = layout_for(config.out);
  const auto schema = sim::default_schema();
  const auto ice = rank::load_model(ice_model, schema);
  const auto ace = rank::load_model(ace_model, schema);
  const auto warmup = run_warmup(config);
  auto report = evaluate_models(ice, ace, warmup, config);
  io::write_text_file(paths.comparison_csv, analysis::report_csv(report));
  io::write_text_file(paths.comparison_txt, analysis::report_text(report));
  log << "eval: new-product impression delta "
      << io::format_double(report.new_product_impressions_pct) << "% -> "
      << paths.comparison_csv.string() << '\n';
  return report;
}

namespace {

void record(TheoryOutcome& outcome, bool ok, const std::string& name, const std::string& detail) {
  outcome.passed &= ok;
  outcome.checks.push_back(std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail);
}

}  // namespace

TheoryOutcome cmd_theory(const RunConfig& config, std::ostream& log) {
  using io::format_double;
  const auto paths = layout_for(config.out);
  const std::uint64_t seed = derive_seed(config.seed, "theory");
  const auto& tc = config.theory;
  TheoryOutcome outcome;

  {
    double worst = 0;
    for (int m = 1; m <= 64; ++m) {
      for (int k = 0; k <= 100; ++k) {
        const double p = k / 100.0;
        const double direct = theory::aggregated_unexplained_variance(p, m);
        const double via = theory::unexplained_variance(theory::aggregated_positive_prob(p, m));
        worst = std::max(worst, std::abs(direct - via));
      }
    }
    record(outcome, worst <= 1e-12, "variance identity", "max deviation " + format_double(worst));
  }

  const auto curve = theory::figure1_table(tc.m_values, tc.grid_step);
  io::write_text_file(paths.figure1, theory::figure1_csv(curve));
  for (int m : tc.m_values) {
    double best_p = 0, best = -1;
    for (const auto& row : curve) {
      if (row.m == m && row.epsilon_tilde > best) {
        best = row.epsilon_tilde;
        best_p = row.p;
      }
    }
    const double peak = theory::peak_probability(m);
    const double at_peak = theory::aggregated_unexplained_variance(peak, m);
    const bool ok = std::abs(best_p - peak) <= tc.grid_step + 1e-12 &&
                    std::abs(at_peak - 0.25) <= 1e-9;
    record(outcome, ok, "figure1 peak m=" + std::to_string(m),
           "grid argmax " + format_double(best_p) + " vs " + format_double(peak));
  }

  {
    Rng rng(derive_seed(seed, "variance_pairs"));
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const theory::VariancePair pair{rng.uniform() * 0.25, rng.uniform() * 0.25};
      const double closed = theory::optimal_weight(pair);
      double best_w = 0, best = 0;
      for (int k = 0; k <= 1'000'000; ++k) {
        const double w = k * 1e-6;
        const double mse = theory::expected_mse(w, pair);
        if (k == 0 || mse < best) {
          best = mse;
          best_w = w;
        }
      }
      worst = std::max(worst, std::abs(best_w - closed));
    }
    record(outcome, worst <= 1e-6, "optimal weight vs grid", "max deviation " + format_double(worst));
  }

  {
    std::ostringstream csv;
    csv << "spec,m,samples,w_hat,w_star,e_bhv_hat,e_nbhv_hat,residue_correlation\n";
    const auto specs = theory::reference_weight_specs(tc.sample_count, seed);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto mc = theory::monte_carlo_weight(specs[i]);
      csv << i << ',' << specs[i].m << ',' << specs[i].sample_count << ','
          << format_double(mc.w_hat) << ',' << format_double(mc.w_star) << ','
          << format_double(mc.e_bhv_hat) << ',' << format_double(mc.e_nbhv_hat) << ','
          << format_double(mc.residue_correlation) << '\n';
      record(outcome, std::abs(mc.w_hat - mc.w_star) <= 0.05,
             "monte carlo weight spec " + std::to_string(i),
             "w_hat " + format_double(mc.w_hat) + " w* " + format_double(mc.w_star));
    }
    io::write_text_file(paths.monte_carlo, csv.str());
  }

  {
    const auto spec = theory::reference_shift_spec(tc.sample_count, seed);
    const auto rows = theory::ace_weight_shift(spec, tc.m_values);
    const auto mc = theory::monte_carlo_weight_shift(spec, tc.m_values);
    io::write_text_file(paths.weight_shift, theory::weight_shift_csv(rows));
    io::write_text_file(paths.weight_shift_mc, theory::weight_shift_csv(mc));
    bool decreasing = true;
    double worst = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].m > rows[i - 1].m && !(rows[i].w_star < rows[i - 1].w_star)) {
        decreasing = false;
      }
      worst = std::max({worst, std::abs(rows[i].w_star - mc[i].w_star),
                        std::abs(rows[i].e_bhv - mc[i].e_bhv),
                        std::abs(rows[i].e_nbhv - mc[i].e_nbhv)});
    }
    record(outcome, decreasing, "weight shift monotone", "w* strictly decreasing in m");
    record(outcome, worst <= 0.01, "weight shift vs monte carlo",
           "max deviation " + format_double(worst));
  }

  std::ostringstream text;
  for (const auto& line : outcome.checks) text << line << '\n';
  io::write_text_file(paths.theory_checks, text.str());
  log << "theory: " << (outcome.passed ? "all checks passed" : "CHECKS FAILED") << '\n'
      << text.str();
  return outcome;
}

int cmd_pipeline(const RunConfig& config, std::ostream& log) {
  using io::format_double;
  const auto paths = layout_for(config.out);
  cmd_simulate(config, log);
  const auto stats = cmd_curate(paths.events, DatasetKind::kIce, config, paths.ice_dataset, log);
  cmd_curate(paths.events, DatasetKind::kAce, config, paths.ace_dataset, log);
  const auto ice = cmd_train(paths.ice_dataset, config, paths.ice_model, log);
  const auto ace = cmd_train(paths.ace_dataset, config, paths.ace_model, log);
  const auto report = cmd_eval(paths.ice_model, paths.ace_model, config, log);
  const auto theory = cmd_theory(config, log);

  const double ratio = report.ice.new_product_impression_share > 0
                           ? report.ace.new_product_impression_share /
                                 report.ice.new_product_impression_share
                           : 0.0;
  std::ostringstream s;
  s << "pipeline summary (seed " << config.seed << ")\n"
    << "behavioral_gain_share ICE " << format_double(report.ice.behavioral_gain_share) << " ACE "
    << format_double(report.ace.behavioral_gain_share) << '\n'
    << "new_product_impression_share@" << config.eval.k << " ICE "
    << format_double(report.ice.new_product_impression_share) << " ACE "
    << format_double(report.ace.new_product_impression_share) << " ratio "
    << format_double(ratio) << '\n'
    << "distinct_query_fraction ICE " << format_double(stats.ice.distinct_query_fraction)
    << " ACE " << format_double(stats.ace.distinct_query_fraction) << '\n'
    << "distinct_pair_fraction ICE " << format_double(stats.ice.distinct_pair_fraction)
    << " ACE " << format_double(stats.ace.distinct_pair_fraction) << '\n'
    << "instances ICE " << stats.ice.instances << " ACE " << stats.ace.instances << '\n'
    << "ab_delta_pct impressions " << format_double(report.new_product_impressions_pct)
    << " clicks " << format_double(report.new_product_clicks_pct) << " purchases "
    << format_double(report.new_product_purchases_pct) << '\n'
    << "mean_ndcg ICE " << format_double(report.ice.mean_ndcg) << " ACE "
    << format_double(report.ace.mean_ndcg) << '\n'
    << "theory_checks " << (theory.passed ? "PASS" : "FAIL") << '\n';
  io::write_text_file(paths.summary, s.str());
  log << s.str();
  return theory.passed ? 0 : 2;
}

}  // namespace ace::cli
