// Synthetic position-biased search traffic with a popularity feedback loop.
//
// Each day every session samples a query from a Zipf law, the active policy
// ranks the whole launched catalog for that query, and the customer engages
// with the product at position r with probability exam_decay^(r-1) * affinity.
// Engagement counters feed the behavioral features and are updated at the end
// of the day, so all sessions of one day see the same snapshot.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ace/core.hpp"
#include "ace/random.hpp"

namespace ace::sim {

struct SimConfig {
  int num_queries = 50;
  int catalog_size = 500;
  int num_days = 21;
  int sessions_per_day = 600;
  double query_zipf_exponent = 1.1;
  int results_per_page = 16;
  double exam_decay = 0.85;
  double affinity_mean = 0.2;
  double affinity_concentration = 5.0;
  double text_match_noise_sd = 0.2;
  int new_products_per_day = 6;
  double purchase_given_click = 0.3;
  double ctr_alpha = 2.0;
  double ctr_beta = 20.0;
  std::uint64_t seed = 1;
};

/// Throws Error naming the offending field.
void validate(const SimConfig& config);

/// Feature layout produced by compute_features.
namespace feature {
inline constexpr std::size_t kCtr = 0;
inline constexpr std::size_t kLogImpressions = 1;
inline constexpr std::size_t kLogClicks = 2;
inline constexpr std::size_t kTextMatch = 3;
inline constexpr std::size_t kDaysSinceLaunch = 4;
inline constexpr std::size_t kIsNew = 5;
inline constexpr std::size_t kCount = 6;
}  // namespace feature

inline constexpr int kNewnessDays = 7;

FeatureSchema default_schema();

struct PairState {
  double affinity = 0;
  double text_match = 0;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;
};

class World {
 public:
  const SimConfig& config() const { return config_; }
  const std::vector<Product>& catalog() const { return catalog_; }
  const std::vector<std::string>& query_ids() const { return query_ids_; }

  std::size_t query_index(const std::string& query_id) const;
  std::size_t product_index(const std::string& product_id) const;

  const PairState& pair(std::size_t query, std::size_t product) const {
    return pairs_[product * query_ids_.size() + query];
  }
  PairState& pair(std::size_t query, std::size_t product) {
    return pairs_[product * query_ids_.size() + query];
  }

  /// Total impressions of a product summed over queries.
  std::int64_t product_impressions(std::size_t product) const;

  /// Last day whose new products have been injected; -1 before any day.
  int injected_through() const { return injected_through_; }

 private:
  friend World init_world(const SimConfig& config);
  friend void begin_day(World& world, int day);

  void add_product(int launch_day);

  SimConfig config_;
  std::vector<Product> catalog_;
  std::vector<std::string> query_ids_;
  std::unordered_map<std::string, std::size_t> query_lookup_;
  std::unordered_map<std::string, std::size_t> product_lookup_;
  std::vector<PairState> pairs_;  // product-major
  int injected_through_ = -1;
};

/// Scores a feature vector; higher ranks first.
using ScoringPolicy = std::function<double(std::span<const double>)>;

World init_world(const SimConfig& config);

/// exam_decay^(position-1).
double examination_probability(int position, double exam_decay);

std::vector<double> compute_features(const World& world, std::size_t query,
                                     std::size_t product, int day);
std::vector<double> compute_features(const World& world, const std::string& query_id,
                                     const std::string& product_id, int day);

/// Injects the day's new products (launch_day = day). Idempotent per day.
void begin_day(World& world, int day);

/// Launched products ranked for one query under `policy`: descending score,
/// ties by ascending product_id. Returns catalog indices.
std::vector<std::size_t> rank_catalog(const World& world, std::size_t query, int day,
                                      const ScoringPolicy& policy);

struct DayLog {
  std::vector<SearchEvent> events;
  /// purchases[e][j] is the side-channel purchase flag of events[e].results[j].
  std::vector<std::vector<std::uint8_t>> purchases;
};

/// Runs one day of traffic and then folds the day's impressions and clicks
/// into the world's counters.
DayLog simulate_day(World& world, int day, const ScoringPolicy& policy);

/// Smoothed CTR plus a small text-match term; the incumbent ranker.
ScoringPolicy bootstrap_policy(const World& world);

/// Gini coefficient of a non-negative sample (0 = perfectly even).
double gini(std::vector<double> values);

std::string query_id_for(std::size_t index);
std::string product_id_for(std::size_t index);
std::string session_id_for(int day, int session);

}  // namespace ace::sim
