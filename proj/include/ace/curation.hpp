// ICE and ACE training-set construction from search event logs.
//
// ICE keeps every search session as its own ranking instance with binary
// labels. ACE collapses all sessions of a query within one day into a single
// instance: labels of repeated (query, product) pairs are summed, and the
// positive sums are mapped onto grades 1..B-1 by per-day empirical quantile.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ace/core.hpp"

namespace ace::curation {

struct AceConfig {
  int num_buckets = 6;
};

void validate(const AceConfig& config);

struct AggregateRecord {
  int day = 0;
  std::string query_id;
  std::string product_id;
  int l_tilde = 0;
  std::vector<double> merged_features;
  int occurrence_count = 0;
};

Dataset build_ice(const std::vector<SearchEvent>& events, const FeatureSchema& schema);

/// All events must share one day. Output sorted by (query_id, product_id).
std::vector<AggregateRecord> aggregate_day(const std::vector<SearchEvent>& events);

/// Maps each distinct positive value to a bucket in 1..B-1 by
/// ceil(rank * (B-1) / n), where rank is the 1-based position of the value's
/// last occurrence in the ascending sort. Ties therefore share a bucket and
/// the largest value always lands in B-1.
std::map<int, int> quantile_bucket(const std::vector<int>& values, int num_buckets);

Dataset build_ace(const std::vector<SearchEvent>& events, const FeatureSchema& schema,
                  const AceConfig& config);

struct KindStats {
  std::size_t instances = 0;
  std::size_t items = 0;
  double distinct_query_fraction = 0;
  double distinct_pair_fraction = 0;
};

struct DatasetStats {
  KindStats ice;
  KindStats ace;
};

/// Distinctness is keyed by day: a query occurrence is one instance, counted
/// distinct per (day, query_id); a pair occurrence is one item, counted
/// distinct per (day, query_id, product_id).
DatasetStats dataset_stats(const std::vector<SearchEvent>& events, const Dataset& ice,
                           const Dataset& ace);

/// CSV rows `kind,metric,value`, four metrics per kind, with header.
std::string stats_csv(const DatasetStats& stats);

/// Day and query of an ACE group key "day:query_id".
std::pair<int, std::string> parse_ace_group_key(const std::string& key);

}  // namespace ace::curation
