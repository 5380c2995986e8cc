#include <gtest/gtest.h>

#include <map>
#include <set>

#include "ace/curation.hpp"
#include "ace/random.hpp"
#include "ace/simulator.hpp"
#include "test_util.hpp"

namespace ace::curation {
namespace {

using test::event;
using test::two_feature_schema;

TEST(BuildIce, OneInstancePerEvent) {
  const std::vector<SearchEvent> events{event(0, "s1", "q1", {"a", "b", "c"}, {0, 1, 0}),
                                        event(0, "s2", "q1", {"a"}, {1}),
                                        event(1, "s3", "q2", {"d", "e"}, {0, 0})};
  const auto ds = build_ice(events, two_feature_schema());
  ASSERT_EQ(ds.instances.size(), 3u);
  EXPECT_EQ(ds.kind, DatasetKind::kIce);
  EXPECT_EQ(ds.instances[0].group_key, "s1");
  std::vector<int> grades;
  for (const auto& item : ds.instances[0].items) grades.push_back(item.grade);
  EXPECT_EQ(grades, (std::vector<int>{0, 1, 0}));
  EXPECT_TRUE(build_ice({}, two_feature_schema()).instances.empty());
}

TEST(AggregateDay, SumsLabelsAndCountsOccurrences) {
  const std::vector<SearchEvent> events{event(0, "s1", "q", {"A", "B"}, {1, 0}),
                                        event(0, "s2", "q", {"A"}, {1}),
                                        event(0, "s3", "q", {"B", "A"}, {0, 0})};
  const auto records = aggregate_day(events);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].product_id, "A");
  EXPECT_EQ(records[0].l_tilde, 2);
  EXPECT_EQ(records[0].occurrence_count, 3);
  EXPECT_EQ(records[1].product_id, "B");
  EXPECT_EQ(records[1].l_tilde, 0);
  EXPECT_EQ(records[1].occurrence_count, 2);
}

TEST(AggregateDay, MeanMergesFeatures) {
  SearchEvent a{0, "s1", "q", {{"A", 1, {1.0, 0.0}, 0}}};
  SearchEvent b{0, "s2", "q", {{"A", 1, {3.0, 0.0}, 1}}};
  const auto records = aggregate_day({a, b});
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].merged_features, (std::vector<double>{2.0, 0.0}));
}

TEST(AggregateDay, RejectsMixedDays) {
  EXPECT_THROW(aggregate_day({event(0, "s1", "q", {"A"}, {0}), event(1, "s2", "q", {"A"}, {0})}),
               Error);
}

TEST(QuantileBucket, ReferenceExamples) {
  const auto ties = quantile_bucket({1, 1, 1, 1}, 4);
  ASSERT_EQ(ties.size(), 1u);
  EXPECT_EQ(ties.at(1), 3);
  const auto m = quantile_bucket({1, 2, 3, 4}, 3);
  EXPECT_EQ(m, (std::map<int, int>{{1, 1}, {2, 1}, {3, 2}, {4, 2}}));
  EXPECT_THROW(quantile_bucket({}, 4), Error);
  EXPECT_THROW(quantile_bucket({1}, 1), Error);
  EXPECT_THROW(quantile_bucket({0, 1}, 3), Error);
}

// ceil(rank * (B-1) / n) with rank = count of values <= v, in integer math.
int oracle_bucket(const std::vector<int>& values, int v, int buckets) {
  long rank = 0;
  for (int x : values) rank += x <= v;
  const long n = static_cast<long>(values.size());
  return static_cast<int>((rank * (buckets - 1) + n - 1) / n);
}

TEST(QuantileBucket, MatchesRankOracleAndIsMonotone) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 40);
    const int buckets = 2 + static_cast<int>(rng.uniform() * 8);
    std::vector<int> values;
    for (int i = 0; i < n; ++i) values.push_back(1 + static_cast<int>(std::pow(rng.uniform(), 3) * 50));
    const auto m = quantile_bucket(values, buckets);
    int max_value = 0;
    for (int v : values) {
      EXPECT_EQ(m.at(v), oracle_bucket(values, v, buckets));
      max_value = std::max(max_value, v);
    }
    EXPECT_EQ(m.at(max_value), buckets - 1);
    for (const auto& [v1, b1] : m) {
      EXPECT_GE(b1, 1);
      for (const auto& [v2, b2] : m) {
        if (v1 <= v2) EXPECT_LE(b1, b2);
      }
    }
  }
}

TEST(BuildAce, OneInstancePerDailyQuery) {
  std::vector<SearchEvent> events;
  for (int s = 0; s < 5; ++s) events.push_back(event(0, "s" + std::to_string(s), "q", {"A", "B"}, {s % 2, 0}));
  events.push_back(event(1, "t", "q", {"A"}, {1}));
  const auto ds = build_ace(events, two_feature_schema(), AceConfig{});
  ASSERT_EQ(ds.instances.size(), 2u);
  EXPECT_EQ(ds.instances[0].group_key, "0:q");
  EXPECT_EQ(ds.instances[1].group_key, "1:q");
  EXPECT_EQ(parse_ace_group_key("12:q0003"), (std::pair<int, std::string>{12, "q0003"}));
  EXPECT_TRUE(validate_dataset(ds, 6).ok);
}

TEST(BuildAce, TwoBucketsGiveBinaryGrades) {
  std::vector<SearchEvent> events;
  for (int s = 0; s < 6; ++s) {
    events.push_back(event(0, "s" + std::to_string(s), "q" + std::to_string(s % 2), {"A", "B", "C"},
                           {1, s % 3 == 0, 0}));
  }
  const auto ds = build_ace(events, two_feature_schema(), AceConfig{2});
  for (const auto& inst : ds.instances) {
    for (const auto& item : inst.items) EXPECT_TRUE(item.grade == 0 || item.grade == 1);
  }
}

TEST(BuildAce, CapsPopularPairs) {
  // One pair shown 100 times with 80 clicks, another shown twice with 1 click.
  std::vector<SearchEvent> events;
  for (int s = 0; s < 100; ++s) events.push_back(event(0, "a" + std::to_string(s), "q1", {"P"}, {s < 80}));
  for (int s = 0; s < 2; ++s) events.push_back(event(0, "b" + std::to_string(s), "q2", {"R"}, {s == 0}));
  const AceConfig config{6};
  const auto ds = build_ace(events, two_feature_schema(), config);
  ASSERT_EQ(ds.instances.size(), 2u);
  const int popular = ds.instances[0].items[0].grade;
  const int rare = ds.instances[1].items[0].grade;
  EXPECT_GE(rare, 1);
  EXPECT_LE(popular, config.num_buckets - 1);
  EXPECT_LE(popular - rare, config.num_buckets - 2);
}

TEST(BuildAce, ZeroCountsStayZero) {
  const std::vector<SearchEvent> events{event(0, "s1", "q", {"A", "B"}, {1, 0}),
                                        event(0, "s2", "q", {"A", "B"}, {1, 0})};
  const auto ds = build_ace(events, two_feature_schema(), AceConfig{});
  for (const auto& item : ds.instances[0].items) EXPECT_EQ(item.grade == 0, item.product_id == "B");
}

TEST(DatasetStats, ReferenceExamples) {
  const std::vector<SearchEvent> events{event(0, "s1", "q1", {"A"}, {0}),
                                        event(0, "s2", "q1", {"A"}, {1}),
                                        event(0, "s3", "q2", {"A"}, {0})};
  const auto stats = dataset_stats(events, build_ice(events, two_feature_schema()),
                                   build_ace(events, two_feature_schema(), AceConfig{}));
  EXPECT_NEAR(stats.ice.distinct_query_fraction, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(stats.ace.distinct_query_fraction, 1.0);
  EXPECT_EQ(stats.ice.instances, 3u);
  EXPECT_EQ(stats.ace.instances, 2u);

  const std::vector<SearchEvent> one{event(0, "s1", "q1", {"A", "B"}, {0, 1})};
  const auto single = dataset_stats(one, build_ice(one, two_feature_schema()),
                                    build_ace(one, two_feature_schema(), AceConfig{}));
  EXPECT_EQ(single.ice.distinct_query_fraction, 1.0);
  EXPECT_EQ(single.ice.distinct_pair_fraction, 1.0);
  EXPECT_EQ(single.ace.distinct_pair_fraction, 1.0);
}

TEST(DatasetStats, CsvHasFourMetricsPerKind) {
  const std::vector<SearchEvent> events{event(0, "s1", "q1", {"A"}, {0})};
  const auto csv = stats_csv(dataset_stats(events, build_ice(events, two_feature_schema()),
                                           build_ace(events, two_feature_schema(), AceConfig{})));
  int ice = 0, ace = 0;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "kind,metric,value");
  while (std::getline(in, line)) {
    ice += line.rfind("ICE,", 0) == 0;
    ace += line.rfind("ACE,", 0) == 0;
  }
  EXPECT_EQ(ice, 4);
  EXPECT_EQ(ace, 4);
}

std::vector<SearchEvent> simulated_log(std::uint64_t seed) {
  sim::SimConfig c;
  c.seed = seed;
  c.num_days = 4;
  c.sessions_per_day = 200;
  auto world = sim::init_world(c);
  std::vector<SearchEvent> events;
  for (int d = 0; d < c.num_days; ++d) {
    auto log = sim::simulate_day(world, d, sim::bootstrap_policy(world));
    events.insert(events.end(), log.events.begin(), log.events.end());
  }
  return events;
}

TEST(Conservation, SimulatedLogs) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto events = simulated_log(seed);
    std::map<int, std::vector<SearchEvent>> by_day;
    for (const auto& ev : events) by_day[ev.day].push_back(ev);
    for (const auto& [day, day_events] : by_day) {
      long raw = 0, records_total = 0;
      for (const auto& ev : day_events) {
        records_total += static_cast<long>(ev.results.size());
        for (const auto& r : ev.results) raw += r.label;
      }
      long summed = 0, occurrences = 0;
      for (const auto& rec : aggregate_day(day_events)) {
        summed += rec.l_tilde;
        occurrences += rec.occurrence_count;
        EXPECT_LE(rec.l_tilde, rec.occurrence_count);
      }
      EXPECT_EQ(summed, raw) << "seed " << seed << " day " << day;
      EXPECT_EQ(occurrences, records_total);
    }
    const auto ace = build_ace(events, sim::default_schema(), AceConfig{});
    std::set<std::string> keys;
    for (const auto& inst : ace.instances) EXPECT_TRUE(keys.insert(inst.group_key).second);
    EXPECT_TRUE(validate_dataset(ace, 6).ok);
  }
}

}  // namespace
}  // namespace ace::curation
