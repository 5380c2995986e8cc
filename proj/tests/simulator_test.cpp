#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ace/io.hpp"
#include "ace/simulator.hpp"

namespace ace::sim {
namespace {

SimConfig small_config(std::uint64_t seed = 7) {
  SimConfig c;
  c.num_queries = 5;
  c.catalog_size = 10;
  c.sessions_per_day = 50;
  c.results_per_page = 5;
  c.new_products_per_day = 2;
  c.seed = seed;
  return c;
}

std::string log_bytes(const std::vector<SearchEvent>& events) {
  std::ostringstream out;
  io::write_event_log(out, default_schema(), events);
  return out.str();
}

TEST(SimConfig, RejectsInvalidFieldsByName) {
  auto c = small_config();
  c.sessions_per_day = 0;
  try {
    validate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("sessions_per_day"), std::string::npos);
  }
  c = small_config();
  c.exam_decay = 1.5;
  EXPECT_THROW(validate(c), Error);
  c = small_config();
  c.purchase_given_click = -0.1;
  EXPECT_THROW(validate(c), Error);
  c = small_config();
  c.new_products_per_day = 0;
  EXPECT_NO_THROW(validate(c));
}

TEST(InitWorld, DeterministicCatalog) {
  const auto a = init_world(small_config());
  const auto b = init_world(small_config());
  ASSERT_EQ(a.catalog().size(), 10u);
  EXPECT_EQ(a.catalog(), b.catalog());
  for (const auto& p : a.catalog()) EXPECT_EQ(p.launch_day, 0);
  for (std::size_t q = 0; q < 5; ++q) {
    for (std::size_t p = 0; p < 10; ++p) {
      EXPECT_EQ(a.pair(q, p).affinity, b.pair(q, p).affinity);
      EXPECT_EQ(a.pair(q, p).impressions, 0);
    }
  }
}

TEST(InitWorld, LargeConcentrationPinsAffinityToMean) {
  auto c = small_config();
  c.affinity_concentration = 1e7;
  const auto w = init_world(c);
  for (std::size_t q = 0; q < 5; ++q) {
    for (std::size_t p = 0; p < 10; ++p) EXPECT_NEAR(w.pair(q, p).affinity, c.affinity_mean, 1e-3);
  }
}

TEST(ExaminationProbability, GeometricDecay) {
  EXPECT_EQ(examination_probability(1, 0.85), 1.0);
  EXPECT_NEAR(examination_probability(3, 0.85), 0.7225, 1e-15);
  for (int k = 1; k < 30; ++k) EXPECT_EQ(examination_probability(k, 1.0), 1.0);
  for (int k = 1; k < 30; ++k) {
    EXPECT_GE(examination_probability(k, 0.7), examination_probability(k + 1, 0.7));
  }
}

TEST(ComputeFeatures, EmptyHistoryOnLaunchDay) {
  auto w = init_world(small_config());
  begin_day(w, 4);
  const std::size_t p = w.catalog().size() - 1;
  ASSERT_EQ(w.catalog()[p].launch_day, 4);
  const auto f = compute_features(w, 0, p, 4);
  const auto& c = w.config();
  EXPECT_DOUBLE_EQ(f[feature::kCtr], c.ctr_alpha / (c.ctr_alpha + c.ctr_beta));
  EXPECT_EQ(f[feature::kLogImpressions], 0.0);
  EXPECT_EQ(f[feature::kLogClicks], 0.0);
  EXPECT_EQ(f[feature::kDaysSinceLaunch], 0.0);
  EXPECT_EQ(f[feature::kIsNew], 1.0);
  EXPECT_THROW(compute_features(w, 0, p, 3), Error);
}

TEST(ComputeFeatures, NewnessBoundary) {
  auto w = init_world(small_config());
  for (int d = 0; d <= 3; ++d) begin_day(w, d);
  const std::size_t p = w.catalog().size() - 1;
  ASSERT_EQ(w.catalog()[p].launch_day, 3);
  auto f = compute_features(w, 0, p, 10);
  EXPECT_EQ(f[feature::kDaysSinceLaunch], 7.0);
  EXPECT_EQ(f[feature::kIsNew], 0.0);
  f = compute_features(w, 0, p, 9);
  EXPECT_EQ(f[feature::kIsNew], 1.0);
}

TEST(ComputeFeatures, ZeroNoiseTextMatchIsAffinity) {
  auto c = small_config();
  c.text_match_noise_sd = 0;
  const auto w = init_world(c);
  for (std::size_t p = 0; p < 10; ++p) {
    EXPECT_EQ(compute_features(w, 1, p, 0)[feature::kTextMatch], w.pair(1, p).affinity);
  }
}

TEST(ComputeFeatures, TextMatchIsStablePerPair) {
  const auto a = init_world(small_config());
  auto b = init_world(small_config());
  simulate_day(b, 0, bootstrap_policy(b));
  for (std::size_t p = 0; p < 10; ++p) {
    EXPECT_EQ(compute_features(a, 2, p, 0)[feature::kTextMatch],
              compute_features(b, 2, p, 1)[feature::kTextMatch]);
  }
  EXPECT_THROW(compute_features(a, "q9999", "p000000", 0), Error);
}

TEST(SimulateDay, ZeroAffinityNeverEngages) {
  auto w = init_world(small_config());
  for (std::size_t p = 0; p < 10; ++p) w.pair(0, p).affinity = 0;
  for (int d = 0; d < 5; ++d) {
    const auto log = simulate_day(w, d, bootstrap_policy(w));
    for (const auto& ev : log.events) {
      if (ev.query_id != query_id_for(0)) continue;
      for (const auto& r : ev.results) {
        if (w.product_index(r.product_id) < 10) EXPECT_EQ(r.label, 0);
      }
    }
  }
}

TEST(SimulateDay, ConstantAffinityWithoutPositionBias) {
  auto c = small_config();
  c.exam_decay = 1.0;
  c.sessions_per_day = 20000;
  c.new_products_per_day = 0;
  auto w = init_world(c);
  const double a = 0.3;
  for (std::size_t q = 0; q < 5; ++q) {
    for (std::size_t p = 0; p < 10; ++p) w.pair(q, p).affinity = a;
  }
  const auto log = simulate_day(w, 0, bootstrap_policy(w));
  std::vector<double> clicks(5), shows(5);
  for (const auto& ev : log.events) {
    for (const auto& r : ev.results) {
      clicks[r.position - 1] += r.label;
      shows[r.position - 1] += 1;
    }
  }
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(clicks[k] / shows[k], a, 3 * std::sqrt(a * (1 - a) / shows[k])) << k;
  }
}

TEST(SimulateDay, PositionBiasMakesCtrNonIncreasing) {
  auto c = small_config();
  c.sessions_per_day = 10000;
  c.new_products_per_day = 0;
  auto w = init_world(c);
  for (std::size_t q = 0; q < 5; ++q) {
    for (std::size_t p = 0; p < 10; ++p) w.pair(q, p).affinity = 0.5;
  }
  const auto log = simulate_day(w, 0, bootstrap_policy(w));
  std::vector<double> clicks(5), shows(5);
  for (const auto& ev : log.events) {
    for (const auto& r : ev.results) {
      clicks[r.position - 1] += r.label;
      shows[r.position - 1] += 1;
    }
  }
  for (int k = 0; k + 1 < 5; ++k) {
    const double p1 = clicks[k] / shows[k], p2 = clicks[k + 1] / shows[k + 1];
    const double sd = std::sqrt(p1 * (1 - p1) / shows[k] + p2 * (1 - p2) / shows[k + 1]);
    EXPECT_GE(p1 + 3 * sd, p2) << k;
  }
}

TEST(SimulateDay, ByteIdenticalRuns) {
  auto a = init_world(small_config(11));
  auto b = init_world(small_config(11));
  for (int d = 0; d < 3; ++d) {
    const auto la = simulate_day(a, d, bootstrap_policy(a));
    const auto lb = simulate_day(b, d, bootstrap_policy(b));
    EXPECT_EQ(log_bytes(la.events), log_bytes(lb.events));
    EXPECT_EQ(la.purchases, lb.purchases);
  }
}

TEST(SimulateDay, EventShapeAndCounters) {
  auto w = init_world(small_config());
  const auto log = simulate_day(w, 0, bootstrap_policy(w));
  ASSERT_EQ(log.events.size(), 50u);
  std::int64_t clicks = 0;
  for (std::size_t e = 0; e < log.events.size(); ++e) {
    const auto& ev = log.events[e];
    EXPECT_TRUE(validate_event(ev, default_schema()).ok);
    EXPECT_EQ(ev.results.size(), 5u);
    for (std::size_t j = 0; j < ev.results.size(); ++j) {
      clicks += ev.results[j].label;
      if (log.purchases[e][j]) EXPECT_EQ(ev.results[j].label, 1);
    }
  }
  std::int64_t counted_clicks = 0, counted_impressions = 0;
  for (std::size_t q = 0; q < 5; ++q) {
    for (std::size_t p = 0; p < w.catalog().size(); ++p) {
      counted_clicks += w.pair(q, p).clicks;
      counted_impressions += w.pair(q, p).impressions;
    }
  }
  EXPECT_EQ(counted_clicks, clicks);
  EXPECT_EQ(counted_impressions, 250);
}

TEST(SimulateDay, WithinDaySnapshotAndLaunchGuard) {
  auto w = init_world(small_config());
  simulate_day(w, 0, bootstrap_policy(w));
  const auto log = simulate_day(w, 1, bootstrap_policy(w));
  for (const auto& ev : log.events) {
    for (const auto& r : ev.results) {
      const auto& product = w.catalog()[w.product_index(r.product_id)];
      EXPECT_LE(product.launch_day, 1);
      if (product.launch_day == 1) {
        EXPECT_EQ(r.features[feature::kLogImpressions], 0.0);
        EXPECT_EQ(r.features[feature::kLogClicks], 0.0);
      }
    }
  }
}

TEST(BeginDay, InjectsOncePerDay) {
  auto w = init_world(small_config());
  begin_day(w, 0);
  EXPECT_EQ(w.catalog().size(), 12u);
  begin_day(w, 0);
  EXPECT_EQ(w.catalog().size(), 12u);
  begin_day(w, 1);
  EXPECT_EQ(w.catalog().size(), 14u);
  EXPECT_EQ(w.catalog().back().launch_day, 1);
}

TEST(BootstrapPolicy, TextMatchBreaksEqualCtr) {
  const auto w = init_world(small_config());
  const auto policy = bootstrap_policy(w);
  std::vector<double> low{0.1, 0, 0, 0.2, 0, 1}, high{0.1, 0, 0, 0.4, 0, 1};
  EXPECT_GT(policy(high), policy(low));
}

TEST(BootstrapPolicy, ZeroHistoryOrdersByTextMatch) {
  const auto w = init_world(small_config());
  const auto order = rank_catalog(w, 0, 0, bootstrap_policy(w));
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    EXPECT_GE(w.pair(0, order[i]).text_match, w.pair(0, order[i + 1]).text_match);
  }
}

TEST(BootstrapPolicy, ClickedProductOutranksUnclickedTwin) {
  auto c = small_config();
  c.text_match_noise_sd = 0;
  c.new_products_per_day = 0;
  c.results_per_page = 1;
  auto w = init_world(c);
  for (std::size_t p = 0; p < 10; ++p) w.pair(0, p).affinity = w.pair(0, p).text_match = 0.01;
  w.pair(0, 0).affinity = 0.9;
  w.pair(0, 0).text_match = 0.9;
  w.pair(0, 9).affinity = 0.9;
  w.pair(0, 9).text_match = 0.89;
  for (int d = 0; d < 5; ++d) simulate_day(w, d, bootstrap_policy(w));
  ASSERT_GT(w.pair(0, 0).clicks, 0);
  ASSERT_EQ(w.pair(0, 9).clicks, 0);
  w.pair(0, 9).text_match = 0.9;
  const auto order = rank_catalog(w, 0, 5, bootstrap_policy(w));
  EXPECT_EQ(order.front(), 0u);
}

TEST(FeedbackLoop, ImpressionGiniNonDecreasing) {
  for (std::uint64_t seed : {1, 2, 3}) {
    SimConfig c;
    c.seed = seed;
    auto w = init_world(c);
    double previous = -1;
    for (int d = 0; d < 10; ++d) {
      simulate_day(w, d, bootstrap_policy(w));
      std::vector<double> counts;
      for (std::size_t p = 0; p < w.catalog().size(); ++p) {
        counts.push_back(static_cast<double>(w.product_impressions(p)));
      }
      const double g = gini(counts);
      EXPECT_GE(g, previous) << "seed " << seed << " day " << d;
      previous = g;
    }
  }
}

TEST(Gini, ReferenceValues) {
  EXPECT_EQ(gini({1, 1, 1, 1}), 0.0);
  EXPECT_NEAR(gini({0, 0, 0, 1}), 0.75, 1e-12);
  EXPECT_EQ(gini({}), 0.0);
}

}  // namespace
}  // namespace ace::sim
