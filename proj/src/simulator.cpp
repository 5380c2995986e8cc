#include "ace/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ace::sim {
namespace {

void require(bool condition, const char* field, const char* rule) {
  if (!condition) throw Error(std::string("sim.") + field + ": " + rule);
}

}  // namespace

void validate(const SimConfig& c) {
  require(c.num_queries >= 1, "num_queries", "must be >= 1");
  require(c.catalog_size >= 1, "catalog_size", "must be >= 1");
  require(c.num_days >= 1, "num_days", "must be >= 1");
  require(c.sessions_per_day >= 1, "sessions_per_day", "must be >= 1");
  require(c.sessions_per_day <= 99999, "sessions_per_day", "must be <= 99999");
  require(c.query_zipf_exponent > 0, "query_zipf_exponent", "must be > 0");
  require(c.results_per_page >= 1, "results_per_page", "must be >= 1");
  require(c.exam_decay > 0 && c.exam_decay <= 1, "exam_decay", "must be in (0, 1]");
  require(c.affinity_mean > 0 && c.affinity_mean < 1, "affinity_mean",
          "must be in (0, 1)");
  require(c.affinity_concentration > 0, "affinity_concentration", "must be > 0");
  require(c.text_match_noise_sd >= 0, "text_match_noise_sd", "must be >= 0");
  require(c.new_products_per_day >= 0, "new_products_per_day", "must be >= 0");
  require(c.purchase_given_click >= 0 && c.purchase_given_click <= 1,
          "purchase_given_click", "must be in [0, 1]");
  require(c.ctr_alpha > 0, "ctr_alpha", "must be > 0");
  require(c.ctr_beta > 0, "ctr_beta", "must be > 0");
}

FeatureSchema default_schema() {
  using K = FeatureKind;
  return FeatureSchema({{0, "ctr", K::kBehavioral},
                        {1, "log_impressions", K::kBehavioral},
                        {2, "log_clicks", K::kBehavioral},
                        {3, "text_match", K::kNonBehavioral},
                        {4, "days_since_launch", K::kNonBehavioral},
                        {5, "is_new", K::kNonBehavioral}});
}

std::string query_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%04zu", index);
  return buf;
}

std::string product_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%06zu", index);
  return buf;
}

std::string session_id_for(int day, int session) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%04d-s%05d", day, session);
  return buf;
}

std::size_t World::query_index(const std::string& query_id) const {
  auto it = query_lookup_.find(query_id);
  if (it == query_lookup_.end()) throw Error("unknown query_id " + query_id);
  return it->second;
}

std::size_t World::product_index(const std::string& product_id) const {
  auto it = product_lookup_.find(product_id);
  if (it == product_lookup_.end()) throw Error("unknown product_id " + product_id);
  return it->second;
}

std::int64_t World::product_impressions(std::size_t product) const {
  std::int64_t total = 0;
  for (std::size_t q = 0; q < query_ids_.size(); ++q) total += pair(q, product).impressions;
  return total;
}

void World::add_product(int launch_day) {
  const std::size_t index = catalog_.size();
  Product product{product_id_for(index), launch_day};
  product_lookup_.emplace(product.product_id, index);
  const double a = config_.affinity_mean * config_.affinity_concentration;
  const double b = (1 - config_.affinity_mean) * config_.affinity_concentration;
  for (const auto& qid : query_ids_) {
    PairState state;
    Rng affinity_rng(derive_seed(config_.seed, "affinity", qid, product.product_id));
    state.affinity = affinity_rng.beta(a, b);
    state.text_match = state.affinity;
    if (config_.text_match_noise_sd > 0) {
      Rng noise_rng(derive_seed(config_.seed, "text_match", qid, product.product_id));
      state.text_match += noise_rng.normal(0.0, config_.text_match_noise_sd);
    }
    pairs_.push_back(state);
  }
  catalog_.push_back(std::move(product));
}

World init_world(const SimConfig& config) {
  validate(config);
  World world;
  world.config_ = config;
  for (int q = 0; q < config.num_queries; ++q) {
    world.query_ids_.push_back(query_id_for(q));
    world.query_lookup_.emplace(world.query_ids_.back(), q);
  }
  world.catalog_.reserve(config.catalog_size);
  for (int p = 0; p < config.catalog_size; ++p) world.add_product(0);
  return world;
}

double examination_probability(int position, double exam_decay) {
  return std::pow(exam_decay, position - 1);
}

std::vector<double> compute_features(const World& world, std::size_t query,
                                     std::size_t product, int day) {
  const auto& prod = world.catalog().at(product);
  if (prod.launch_day > day) {
    throw Error("product " + prod.product_id + " not launched on day " +
                std::to_string(day));
  }
  const auto& st = world.pair(query, product);
  const auto& c = world.config();
  const int age = day - prod.launch_day;
  std::vector<double> f(feature::kCount);
  f[feature::kCtr] = (static_cast<double>(st.clicks) + c.ctr_alpha) /
                     (static_cast<double>(st.impressions) + c.ctr_alpha + c.ctr_beta);
  f[feature::kLogImpressions] = std::log1p(static_cast<double>(st.impressions));
  f[feature::kLogClicks] = std::log1p(static_cast<double>(st.clicks));
  f[feature::kTextMatch] = st.text_match;
  f[feature::kDaysSinceLaunch] = age;
  f[feature::kIsNew] = age < kNewnessDays ? 1.0 : 0.0;
  return f;
}

std::vector<double> compute_features(const World& world, const std::string& query_id,
                                     const std::string& product_id, int day) {
  return compute_features(world, world.query_index(query_id),
                          world.product_index(product_id), day);
}

void begin_day(World& world, int day) {
  if (day < 0) throw Error("day must be >= 0");
  if (day <= world.injected_through_) return;
  for (int i = 0; i < world.config_.new_products_per_day; ++i) world.add_product(day);
  world.injected_through_ = day;
}

std::vector<std::size_t> rank_catalog(const World& world, std::size_t query, int day,
                                      const ScoringPolicy& policy) {
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(world.catalog().size());
  for (std::size_t p = 0; p < world.catalog().size(); ++p) {
    if (world.catalog()[p].launch_day > day) continue;
    const auto f = compute_features(world, query, p, day);
    scored.emplace_back(policy(f), p);
  }
  // Product ids are zero-padded catalog indices, so index order is id order.
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> order;
  order.reserve(scored.size());
  for (const auto& [s, p] : scored) order.push_back(p);
  return order;
}

DayLog simulate_day(World& world, int day, const ScoringPolicy& policy) {
  begin_day(world, day);
  const auto& c = world.config();
  const ZipfSampler zipf(world.query_ids().size(), c.query_zipf_exponent);
  std::unordered_map<std::size_t, std::vector<std::size_t>> rankings;

  DayLog log;
  log.events.reserve(c.sessions_per_day);
  log.purchases.reserve(c.sessions_per_day);
  for (int s = 0; s < c.sessions_per_day; ++s) {
    Rng rng(derive_seed(c.seed, "session", {static_cast<std::uint64_t>(day),
                                            static_cast<std::uint64_t>(s)}));
    const std::size_t q = zipf.sample(rng);
    auto it = rankings.find(q);
    if (it == rankings.end()) {
      it = rankings.emplace(q, rank_catalog(world, q, day, policy)).first;
    }
    const auto& ranking = it->second;
    const std::size_t shown =
        std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(c.results_per_page));

    SearchEvent ev{day, session_id_for(day, s), world.query_ids()[q], {}};
    std::vector<std::uint8_t> bought(shown, 0);
    ev.results.reserve(shown);
    for (std::size_t j = 0; j < shown; ++j) {
      const std::size_t p = ranking[j];
      const int position = static_cast<int>(j) + 1;
      const double affinity = world.pair(q, p).affinity;
      const bool engaged =
          rng.bernoulli(examination_probability(position, c.exam_decay) * affinity);
      if (engaged) bought[j] = rng.bernoulli(c.purchase_given_click * affinity);
      ev.results.push_back({world.catalog()[p].product_id, position,
                            compute_features(world, q, p, day), engaged ? 1 : 0});
    }
    log.events.push_back(std::move(ev));
    log.purchases.push_back(std::move(bought));
  }

  for (const auto& ev : log.events) {
    const std::size_t q = world.query_index(ev.query_id);
    for (const auto& r : ev.results) {
      auto& st = world.pair(q, world.product_index(r.product_id));
      st.impressions += 1;
      st.clicks += r.label;
    }
  }
  return log;
}

ScoringPolicy bootstrap_policy(const World&) {
  return [](std::span<const double> f) {
    return f[feature::kCtr] + 0.01 * f[feature::kTextMatch];
  };
}

double gini(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (total <= 0) return 0.0;
  double weighted = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    weighted += static_cast<double>(i + 1) * values[i];
  }
  const double n = static_cast<double>(values.size());
  return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

}  // namespace ace::sim
