// Ranking metrics and the ICE-vs-ACE comparison harness.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ace/core.hpp"
#include "ace/ranker.hpp"
#include "ace/simulator.hpp"

namespace ace::analysis {

/// DCG@k / ideal DCG@k with gain 2^g-1 and discount 1/log2(1+pos).
/// Throws when every grade is zero.
double ndcg_at_k(std::span<const int> ranked_grades, int k);

struct EvalResult {
  double mean_ndcg = 0;
  std::size_t evaluated_groups = 0;
  std::size_t skipped_groups = 0;
};

/// Mean NDCG@k over groups with positive ideal DCG, summed in group order.
EvalResult evaluate_model(const rank::GBDTModel& model, const Dataset& dataset, int k);

struct NewProductCounts {
  std::int64_t new_slots = 0;
  std::int64_t total_slots = 0;
  double share() const {
    return total_slots == 0 ? 0.0 : static_cast<double>(new_slots) / total_slots;
  }
};

/// Re-ranks the launched catalog for each event's query with `model` and
/// counts top-k slots held by products younger than `age_days`. `world` must
/// be the start-of-day snapshot the events were drawn from.
NewProductCounts new_product_impressions(const rank::GBDTModel& model, const sim::World& world,
                                         const std::vector<SearchEvent>& eval_events, int k = 16,
                                         int age_days = 7);

double new_product_impression_share(const rank::GBDTModel& model, const sim::World& world,
                                    const std::vector<SearchEvent>& eval_events, int k = 16,
                                    int age_days = 7);

struct OfflineEval {
  NewProductCounts ice;
  NewProductCounts ace;
  std::vector<SearchEvent> events;  // held-out traffic under the bootstrap ranker
};

/// Advances a copy of `world` through `days` days of bootstrap traffic
/// starting at `start_day`, measuring both models' new-product share against
/// each day's start-of-day snapshot.
OfflineEval offline_new_product_eval(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                     const sim::World& world, int start_day, int days, int k,
                                     int age_days);

struct ArmSummary {
  double behavioral_gain_share = 0;
  double mean_ndcg = 0;
  double new_product_impression_share = 0;
  std::int64_t ab_new_impressions = 0;
  std::int64_t ab_new_clicks = 0;
  std::int64_t ab_new_purchases = 0;
};

struct ComparisonReport {
  ArmSummary ice;
  ArmSummary ace;
  // NaN when the ICE count is zero and the ACE count is not.
  double new_product_impressions_pct = 0;
  double new_product_clicks_pct = 0;
  double new_product_purchases_pct = 0;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<std::uint64_t> seeds;
};

/// (treatment - baseline) / baseline * 100; 0 when both are 0. Throws when
/// only the baseline is 0, since the ratio is then undefined.
double percent_delta(double baseline, double treatment);

/// Runs both models as the live ranker on identical copies of `world` for
/// `horizon_days` days from `start_day` and compares new-product
/// (age < age_days) impressions, clicks and purchases. Also fills each arm's
/// behavioral gain share.
ComparisonReport simulated_ab_test(const rank::GBDTModel& ice, const rank::GBDTModel& ace,
                                   const sim::World& world, int start_day, int horizon_days,
                                   int age_days = 3);

/// CSV `metric,ice,ace,delta_pct`.
std::string report_csv(const ComparisonReport& report);
std::string report_text(const ComparisonReport& report);

sim::ScoringPolicy model_policy(const rank::GBDTModel& model);

}  // namespace ace::analysis
