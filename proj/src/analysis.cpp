#include "ace/analysis.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "ace/io.hpp"

namespace ace::analysis {

double ndcg_at_k(std::span<const int> ranked_grades, int k) {
  if (k < 1) throw Error("ndcg_at_k: k must be >= 1");
  const double ideal = rank::ideal_dcg(ranked_grades, k);
  if (ideal <= 0) throw Error("ndcg_at_k: undefined NDCG (no positive grade)");
  double dcg = 0;
  const std::size_t top = std::min<std::size_t>(ranked_grades.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < top; ++r) {
    dcg += rank::ndcg_gain(ranked_grades[r]) * rank::ndcg_discount(static_cast<int>(r) + 1);
  }
  return dcg / ideal;
}

EvalResult evaluate_model(const rank::GBDTModel& model, const Dataset& dataset, int k) {
  require_valid(validate_dataset(dataset));
  EvalResult result;
  double sum = 0;
  for (const auto& inst : dataset.instances) {
    std::vector<int> grades;
    grades.reserve(inst.items.size());
    for (const auto& item : inst.items) grades.push_back(item.grade);
    if (rank::ideal_dcg(grades, k) <= 0) {
      ++result.skipped_groups;
      continue;
    }
    std::unordered_map<std::string, int> grade_of;
    for (const auto& item : inst.items) grade_of.emplace(item.product_id, item.grade);
    std::vector<int> ranked;
    ranked.reserve(inst.items.size());
    for (const auto& pid : rank::rank_instance(model, inst)) ranked.push_back(grade_of.at(pid));
    sum += ndcg_at_k(ranked, k);
    ++result.evaluated_groups;
  }
  if (result.evaluated_groups == 0) throw Error("evaluate_model: no evaluable groups");
  result.mean_ndcg = sum / static_cast<double>(result.evaluated_groups);
  return result;
}

sim::ScoringPolicy model_policy(const rank::GBDTModel& model) {
  return [model](std::span<const double> f) { return rank::score(model, f); };
}

NewProductCounts new_product_impressions(const rank::GBDTModel& model, const sim::World& world,
                                         const std::vector<SearchEvent>& eval_events, int k,
                                         int age_days) {
  const auto policy = model_policy(model);
  std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> per_query;
  NewProductCounts counts;
  for (const auto& ev : eval_events) {
    const std::string cache_key = std::to_string(ev.day) + ":" + ev.query_id;
    auto it = per_query.find(cache_key);
    if (it == per_query.end()) {
      const auto ranking = sim::rank_catalog(world, world.query_index(ev.query_id), ev.day, policy);
      const std::size_t top = std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(k));
      std::int64_t fresh = 0;
      for (std::size_t r = 0; r < top; ++r) {
        if (ev.day - world.catalog()[ranking[r]].launch_day < age_days) ++fresh;
      }
      it = per_query.emplace(cache_key, std::pair{fresh, static_cast<std::int64_t>(top)}).first;
    }
    counts.new_slots += it->second.first;
    counts.total_slots += it->second.second;
  }
  return counts;
}

double new_product_impression_share(const rank::GBDTModel& model, const sim::World& world,
                                    const std::vector<SearchEvent>& eval_events, int k,
                                    int age_days) {
  return new_product_impressions(model, world, eval_events, k, age_days).share();
}

OfflineEval offline_new_product_eval(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                     const sim::World& world, int start_day, int days, int k,
                                     int age_days) {
  if (days < 1) throw Error("offline evaluation needs at least one day");
  OfflineEval out;
  sim::World live = world;
  const auto bootstrap = sim::bootstrap_policy(live);
  for (int day = start_day; day < start_day + days; ++day) {
    sim::begin_day(live, day);
    const sim::World snapshot = live;
    auto log = sim::simulate_day(live, day, bootstrap);
    const auto a = new_product_impressions(ice, snapshot, log.events, k, age_days);
    const auto b = new_product_impressions(ace, snapshot, log.events, k, age_days);
    out.ice.new_slots += a.new_slots;
    out.ice.total_slots += a.total_slots;
    out.ace.new_slots += b.new_slots;
    out.ace.total_slots += b.total_slots;
    std::move(log.events.begin(), log.events.end(), std::back_inserter(out.events));
  }
  return out;
}

double percent_delta(double baseline, double treatment) {
  if (baseline == 0) {
    if (treatment == 0) return 0.0;
    throw Error("percent delta undefined: baseline count is zero");
  }
  return (treatment - baseline) / baseline * 100.0;
}

namespace {

void run_arm(const rank::GBDTModel& model, const sim::World& world, int start_day,
             int horizon_days, int age_days, ArmSummary& arm) {
  sim::World live = world;
  const auto policy = model_policy(model);
  for (int day = start_day; day < start_day + horizon_days; ++day) {
    const auto log = sim::simulate_day(live, day, policy);
    for (std::size_t e = 0; e < log.events.size(); ++e) {
      const auto& ev = log.events[e];
      for (std::size_t j = 0; j < ev.results.size(); ++j) {
        const auto& r = ev.results[j];
        const int launch = live.catalog()[live.product_index(r.product_id)].launch_day;
        if (day - launch >= age_days) continue;
        arm.ab_new_impressions += 1;
        arm.ab_new_clicks += r.label;
        arm.ab_new_purchases += log.purchases[e][j];
      }
    }
  }
}

double delta_or_nan(std::int64_t baseline, std::int64_t treatment) {
  if (baseline == 0 && treatment != 0) return std::numeric_limits<double>::quiet_NaN();
  return percent_delta(static_cast<double>(baseline), static_cast<double>(treatment));
}

}  // namespace

ComparisonReport simulated_ab_test(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                   const sim::World& world, int start_day, int horizon_days,
                                   int age_days) {
  if (horizon_days <= 0) throw Error("simulated_ab_test: empty horizon");
  if (!(ice.schema == ace.schema)) throw Error("simulated_ab_test: mismatched schemas");
  if (ice.schema.size() != sim::feature::kCount) {
    throw Error("simulated_ab_test: models are not trained on the simulator schema");
  }
  ComparisonReport report;
  run_arm(ice, world, start_day, horizon_days, age_days, report.ice);
  run_arm(ace, world, start_day, horizon_days, age_days, report.ace);
  report.ice.behavioral_gain_share = rank::behavioral_gain_share(ice, ice.schema);
  report.ace.behavioral_gain_share = rank::behavioral_gain_share(ace, ace.schema);
  report.new_product_impressions_pct =
      delta_or_nan(report.ice.ab_new_impressions, report.ace.ab_new_impressions);
  report.new_product_clicks_pct = delta_or_nan(report.ice.ab_new_clicks, report.ace.ab_new_clicks);
  report.new_product_purchases_pct =
      delta_or_nan(report.ice.ab_new_purchases, report.ace.ab_new_purchases);
  report.seeds.push_back(world.config().seed);
  return report;
}

namespace {

std::string delta_or_empty(double baseline, double treatment) {
  if (baseline == 0 && treatment != 0) return "";
  return io::format_double(percent_delta(baseline, treatment));
}

}  // namespace

std::string report_csv(const ComparisonReport& r) {
  using io::format_double;
  std::ostringstream out;
  out << "metric,ice,ace,delta_pct\n";
  auto row = [&](const char* name, double a, double b) {
    out << name << ',' << format_double(a) << ',' << format_double(b) << ','
        << delta_or_empty(a, b) << '\n';
  };
  row("behavioral_gain_share", r.ice.behavioral_gain_share, r.ace.behavioral_gain_share);
  row("mean_ndcg", r.ice.mean_ndcg, r.ace.mean_ndcg);
  row("new_product_impression_share", r.ice.new_product_impression_share,
      r.ace.new_product_impression_share);
  row("ab_new_product_impressions", static_cast<double>(r.ice.ab_new_impressions),
      static_cast<double>(r.ace.ab_new_impressions));
  row("ab_new_product_clicks", static_cast<double>(r.ice.ab_new_clicks),
      static_cast<double>(r.ace.ab_new_clicks));
  row("ab_new_product_purchases", static_cast<double>(r.ice.ab_new_purchases),
      static_cast<double>(r.ace.ab_new_purchases));
  return out.str();
}

std::string report_text(const ComparisonReport& r) {
  using io::format_double;
  std::ostringstream out;
  out << "ICE vs ACE comparison\n"
      << "=====================\n"
      << "behavioral gain share      ICE " << format_double(r.ice.behavioral_gain_share)
      << "   ACE " << format_double(r.ace.behavioral_gain_share) << '\n'
      << "mean NDCG (held-out ICE)   ICE " << format_double(r.ice.mean_ndcg) << "   ACE "
      << format_double(r.ace.mean_ndcg) << '\n'
      << "new-product top-k share    ICE " << format_double(r.ice.new_product_impression_share)
      << "   ACE " << format_double(r.ace.new_product_impression_share) << '\n'
      << "simulated A/B new-product deltas (ACE vs ICE, %):\n"
      << "  impressions " << format_double(r.new_product_impressions_pct) << " ("
      << r.ice.ab_new_impressions << " -> " << r.ace.ab_new_impressions << ")\n"
      << "  clicks      " << format_double(r.new_product_clicks_pct) << " ("
      << r.ice.ab_new_clicks << " -> " << r.ace.ab_new_clicks << ")\n"
      << "  purchases   " << format_double(r.new_product_purchases_pct) << " ("
      << r.ice.ab_new_purchases << " -> " << r.ace.ab_new_purchases << ")\n";
  if (!r.seeds.empty()) {
    out << "seeds:";
    for (auto s : r.seeds) out << ' ' << s;
    out << '\n';
  }
  if (!r.config_echo.empty()) {
    out << "config:\n";
    for (const auto& [k, v] : r.config_echo) out << "  " << k << " = " << v << '\n';
  }
  return out.str();
}

}  // namespace ace::analysis
