#include "ace/curation.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "ace/io.hpp"

namespace ace::curation {

void validate(const AceConfig& config) {
  if (config.num_buckets < 2) throw Error("curation.num_buckets: must be >= 2");
}

Dataset build_ice(const std::vector<SearchEvent>& events, const FeatureSchema& schema) {
  Dataset ds;
  ds.schema = schema;
  ds.kind = DatasetKind::kIce;
  ds.instances.reserve(events.size());
  for (const auto& ev : events) {
    require_valid(validate_event(ev, schema));
    RankingInstance inst{ev.session_id, {}};
    inst.items.reserve(ev.results.size());
    for (const auto& r : ev.results) inst.items.push_back({r.product_id, r.features, r.label});
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::vector<AggregateRecord> aggregate_day(const std::vector<SearchEvent>& events) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, AggregateRecord> acc;
  if (events.empty()) return {};
  const int day = events.front().day;
  for (const auto& ev : events) {
    if (ev.day != day) {
      throw Error("aggregate_day: mixed days " + std::to_string(day) + " and " +
                  std::to_string(ev.day));
    }
    for (const auto& r : ev.results) {
      auto [it, fresh] = acc.try_emplace(Key{ev.query_id, r.product_id});
      auto& rec = it->second;
      if (fresh) {
        rec.day = day;
        rec.query_id = ev.query_id;
        rec.product_id = r.product_id;
        rec.merged_features.assign(r.features.size(), 0.0);
      } else if (rec.merged_features.size() != r.features.size()) {
        throw Error("aggregate_day: feature dimension changes for pair (" +
                    ev.query_id + ", " + r.product_id + ")");
      }
      rec.l_tilde += r.label;
      rec.occurrence_count += 1;
      for (std::size_t f = 0; f < r.features.size(); ++f) {
        rec.merged_features[f] += r.features[f];
      }
    }
  }
  std::vector<AggregateRecord> out;
  out.reserve(acc.size());
  for (auto& [key, rec] : acc) {
    for (double& v : rec.merged_features) v /= rec.occurrence_count;
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<int, int> quantile_bucket(const std::vector<int>& values, int num_buckets) {
  if (values.empty()) throw Error("quantile_bucket: empty input");
  if (num_buckets < 2) throw Error("quantile_bucket: num_buckets must be >= 2");
  std::vector<int> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw Error("quantile_bucket: values must be >= 1");
  const long long n = static_cast<long long>(sorted.size());
  const long long bins = num_buckets - 1;
  std::map<int, int> mapping;
  for (long long i = 0; i < n; ++i) {
    if (i + 1 < n && sorted[i + 1] == sorted[i]) continue;
    const long long rank = i + 1;
    mapping[sorted[i]] = static_cast<int>((rank * bins + n - 1) / n);
  }
  return mapping;
}

Dataset build_ace(const std::vector<SearchEvent>& events, const FeatureSchema& schema,
                  const AceConfig& config) {
  validate(config);
  std::map<int, std::vector<SearchEvent>> by_day;
  for (const auto& ev : events) {
    require_valid(validate_event(ev, schema));
    by_day[ev.day].push_back(ev);
  }
  Dataset ds;
  ds.schema = schema;
  ds.kind = DatasetKind::kAce;
  for (const auto& [day, day_events] : by_day) {
    const auto records = aggregate_day(day_events);
    std::vector<int> positives;
    for (const auto& rec : records) {
      if (rec.l_tilde > 0) positives.push_back(rec.l_tilde);
    }
    const auto buckets =
        positives.empty() ? std::map<int, int>{} : quantile_bucket(positives, config.num_buckets);
    // records are sorted by (query_id, product_id): one run per query.
    for (const auto& rec : records) {
      const std::string key = std::to_string(day) + ":" + rec.query_id;
      if (ds.instances.empty() || ds.instances.back().group_key != key) {
        ds.instances.push_back({key, {}});
      }
      const int grade = rec.l_tilde == 0 ? 0 : buckets.at(rec.l_tilde);
      ds.instances.back().items.push_back({rec.product_id, rec.merged_features, grade});
    }
  }
  return ds;
}

std::pair<int, std::string> parse_ace_group_key(const std::string& key) {
  const auto colon = key.find(':');
  if (colon == std::string::npos) throw Error("malformed ACE group key '" + key + "'");
  return {std::stoi(key.substr(0, colon)), key.substr(colon + 1)};
}

namespace {

using DayQuery = std::pair<int, std::string>;

KindStats summarize(const Dataset& ds, const std::vector<DayQuery>& instance_queries) {
  KindStats s;
  s.instances = ds.instances.size();
  std::set<DayQuery> queries;
  std::set<std::tuple<int, std::string, std::string>> pairs;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& dq = instance_queries[i];
    queries.insert(dq);
    for (const auto& item : ds.instances[i].items) {
      pairs.emplace(dq.first, dq.second, item.product_id);
      ++s.items;
    }
  }
  s.distinct_query_fraction =
      s.instances == 0 ? 0.0 : static_cast<double>(queries.size()) / s.instances;
  s.distinct_pair_fraction =
      s.items == 0 ? 0.0 : static_cast<double>(pairs.size()) / s.items;
  return s;
}

}  // namespace

DatasetStats dataset_stats(const std::vector<SearchEvent>& events, const Dataset& ice,
                           const Dataset& ace) {
  if (ice.instances.size() != events.size()) {
    throw Error("dataset_stats: ICE dataset was not built from these events");
  }
  std::vector<DayQuery> ice_queries;
  ice_queries.reserve(events.size());
  for (const auto& ev : events) ice_queries.emplace_back(ev.day, ev.query_id);
  std::vector<DayQuery> ace_queries;
  ace_queries.reserve(ace.instances.size());
  for (const auto& inst : ace.instances) ace_queries.push_back(parse_ace_group_key(inst.group_key));
  return {summarize(ice, ice_queries), summarize(ace, ace_queries)};
}

std::string stats_csv(const DatasetStats& stats) {
  std::ostringstream out;
  out << "kind,metric,value\n";
  auto rows = [&](const char* kind, const KindStats& s) {
    out << kind << ",instances," << s.instances << '\n'
        << kind << ",items," << s.items << '\n'
        << kind << ",distinct_query_fraction," << io::format_double(s.distinct_query_fraction) << '\n'
        << kind << ",distinct_pair_fraction," << io::format_double(s.distinct_pair_fraction) << '\n';
  };
  rows("ICE", stats.ice);
  rows("ACE", stats.ace);
  return out.str();
}

}  // namespace ace::curation
