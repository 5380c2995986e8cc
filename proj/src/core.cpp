#include "ace/core.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "ace/random.hpp"

namespace ace {

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::kBehavioral ? "behavioral" : "non_behavioral";
}

FeatureKind parse_feature_kind(const std::string& text) {
  if (text == "behavioral") return FeatureKind::kBehavioral;
  if (text == "non_behavioral") return FeatureKind::kNonBehavioral;
  throw Error("unknown feature kind '" + text + "'");
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {
  bool has_bhv = false;
  bool has_nbhv = false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].id != static_cast<int>(i)) {
      throw Error("schema feature ids must be 0..d-1 in order; found id " +
                  std::to_string(features_[i].id) + " at index " +
                  std::to_string(i));
    }
    if (features_[i].name.empty()) {
      throw Error("schema feature " + std::to_string(i) + " has empty name");
    }
    has_bhv |= features_[i].kind == FeatureKind::kBehavioral;
    has_nbhv |= features_[i].kind == FeatureKind::kNonBehavioral;
  }
  if (!has_bhv || !has_nbhv) {
    throw Error(
        "schema needs at least one behavioral and one non_behavioral feature");
  }
}

std::string FeatureSchema::digest() const {
  std::ostringstream canonical;
  for (const auto& f : features_) {
    canonical << f.id << '\t' << f.name << '\t' << to_string(f.kind) << '\n';
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical.str())));
  return buf;
}

const char* to_string(DatasetKind kind) {
  return kind == DatasetKind::kIce ? "ICE" : "ACE";
}

DatasetKind parse_dataset_kind(const std::string& text) {
  if (text == "ICE" || text == "ice") return DatasetKind::kIce;
  if (text == "ACE" || text == "ace") return DatasetKind::kAce;
  throw Error("unknown dataset kind '" + text + "' (expected ICE or ACE)");
}

std::size_t Dataset::item_count() const {
  std::size_t n = 0;
  for (const auto& inst : instances) n += inst.items.size();
  return n;
}

ValidationResult validate_event(const SearchEvent& event,
                                const FeatureSchema& schema) {
  const std::string where = "event(session_id=" + event.session_id + ")";
  if (event.day < 0) return ValidationResult::failure(where + ".day: negative day");
  std::set<std::string> seen;
  for (std::size_t j = 0; j < event.results.size(); ++j) {
    const auto& r = event.results[j];
    const std::string path = where + ".results[" + std::to_string(j) + "]";
    if (r.position != static_cast<int>(j) + 1) {
      return ValidationResult::failure(path + ".position: non-contiguous positions");
    }
    if (!seen.insert(r.product_id).second) {
      return ValidationResult::failure(path + ".product_id: duplicate product " +
                                       r.product_id);
    }
    if (r.label != 0 && r.label != 1) {
      return ValidationResult::failure(path + ".label: non-binary label");
    }
    if (r.features.size() != schema.size()) {
      return ValidationResult::failure(
          path + ".features: dimension " + std::to_string(r.features.size()) +
          " does not match schema dimension " + std::to_string(schema.size()));
    }
    for (std::size_t f = 0; f < r.features.size(); ++f) {
      if (!std::isfinite(r.features[f])) {
        return ValidationResult::failure(path + ".features[" +
                                         std::to_string(f) + "]: non-finite value");
      }
    }
  }
  return ValidationResult::success();
}

ValidationResult validate_dataset(const Dataset& dataset,
                                  std::optional<int> num_buckets) {
  const int max_grade = dataset.kind == DatasetKind::kIce
                            ? 1
                            : (num_buckets ? *num_buckets - 1 : -1);
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    const std::string where = "instances[" + std::to_string(i) + "]";
    std::set<std::string> seen;
    for (std::size_t j = 0; j < inst.items.size(); ++j) {
      const auto& item = inst.items[j];
      const std::string path = where + ".items[" + std::to_string(j) + "]";
      if (item.grade < 0 || (max_grade >= 0 && item.grade > max_grade)) {
        return ValidationResult::failure(path + ".grade: " +
                                         std::to_string(item.grade) +
                                         " outside allowed range for " +
                                         to_string(dataset.kind));
      }
      if (item.features.size() != dataset.schema.size()) {
        return ValidationResult::failure(path + ".features: dimension mismatch");
      }
      for (double v : item.features) {
        if (!std::isfinite(v)) {
          return ValidationResult::failure(path + ".features: non-finite value");
        }
      }
      if (dataset.kind == DatasetKind::kAce &&
          !seen.insert(item.product_id).second) {
        return ValidationResult::failure(path + ".product_id: duplicate product " +
                                         item.product_id + " in ACE instance");
      }
    }
  }
  return ValidationResult::success();
}

void require_valid(const ValidationResult& result) {
  if (!result.ok) throw Error(result.message);
}

}  // namespace ace
