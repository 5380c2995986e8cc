// Shared domain types for search logs and ranking datasets.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ace {

/// Raised for malformed inputs, invalid configuration and I/O failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { kBehavioral, kNonBehavioral };

const char* to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

struct FeatureSpec {
  int id = 0;
  std::string name;
  FeatureKind kind = FeatureKind::kNonBehavioral;

  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature list with a behavioral / non-behavioral partition.
///
/// Construction enforces that ids are exactly 0..d-1 in order and that both
/// kinds are present.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  bool is_behavioral(std::size_t i) const {
    return features_[i].kind == FeatureKind::kBehavioral;
  }

  /// FNV-1a digest of the canonical schema text, as 16 hex digits.
  std::string digest() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

struct Product {
  std::string product_id;
  int launch_day = 0;

  bool operator==(const Product&) const = default;
};

struct ResultRecord {
  std::string product_id;
  int position = 0;
  std::vector<double> features;
  int label = 0;

  bool operator==(const ResultRecord&) const = default;
};

struct SearchEvent {
  int day = 0;
  std::string session_id;
  std::string query_id;
  std::vector<ResultRecord> results;

  bool operator==(const SearchEvent&) const = default;
};

struct RankedItem {
  std::string product_id;
  std::vector<double> features;
  int grade = 0;

  bool operator==(const RankedItem&) const = default;
};

struct RankingInstance {
  std::string group_key;
  std::vector<RankedItem> items;

  bool operator==(const RankingInstance&) const = default;
};

enum class DatasetKind { kIce, kAce };

const char* to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& text);

struct Dataset {
  FeatureSchema schema;
  std::vector<RankingInstance> instances;
  DatasetKind kind = DatasetKind::kIce;

  std::size_t item_count() const;
  bool operator==(const Dataset&) const = default;
};

/// Outcome of a validation pass. Carries the first violated invariant.
struct ValidationResult {
  bool ok = true;
  std::string message;

  static ValidationResult success() { return {}; }
  static ValidationResult failure(std::string message) {
    return {false, std::move(message)};
  }
  explicit operator bool() const { return ok; }
};

ValidationResult validate_event(const SearchEvent& event,
                                const FeatureSchema& schema);

/// ACE grades are checked against `num_buckets` when given; otherwise only
/// non-negativity and product uniqueness are enforced for ACE.
ValidationResult validate_dataset(const Dataset& dataset,
                                  std::optional<int> num_buckets = std::nullopt);

/// Throws Error carrying the validation message when `result` is a failure.
void require_valid(const ValidationResult& result);

}  // namespace ace
