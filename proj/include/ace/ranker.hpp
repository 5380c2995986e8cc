// LambdaRank on gradient-boosted regression trees.
//
// Sign convention: lambda_gradients returns dLoss/dScore. Leaves take the
// Newton step -G/(H+1), so a negative gradient pushes an item's score up.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ace/core.hpp"

namespace ace::rank {

struct TrainConfig {
  int num_trees = 100;
  double learning_rate = 0.1;
  int max_leaves = 8;
  int min_items_per_leaf = 20;
  int ndcg_truncation = 16;
  double sigmoid_scale = 1.0;
  std::uint64_t seed = 1;
};

void validate(const TrainConfig& config);

/// Gain 2^g - 1.
double ndcg_gain(int grade);
/// 1 / log2(1 + rank) for 1-based rank.
double ndcg_discount(int rank);
/// DCG@k of the grades sorted descending.
double ideal_dcg(std::span<const int> grades, int k);

struct LambdaResult {
  std::vector<double> gradients;
  std::vector<double> hessians;
};

/// Pairwise LambdaRank gradients for one group. Current ranks come from the
/// scores (descending, ties by index). Groups with zero ideal DCG@k, or with
/// all grades equal, yield zero vectors.
LambdaResult lambda_gradients(std::span<const double> scores, std::span<const int> grades,
                              int k, double sigma);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// x[feature] <= threshold descends left.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> features) const;
  bool operator==(const Tree&) const = default;
};

struct GBDTModel {
  FeatureSchema schema;
  double base_score = 0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> per_feature_gain;

  bool operator==(const GBDTModel&) const = default;
};

/// Called after each boosting iteration with the gradients that built the
/// tree (flattened in dataset item order) and the model so far.
using FitObserver =
    std::function<void(int iteration, const LambdaResult& gradients, const GBDTModel& model)>;

GBDTModel fit(const Dataset& dataset, const TrainConfig& config,
              const FitObserver& observer = {});

double score(const GBDTModel& model, std::span<const double> features);

/// Product ids by descending score, ties by ascending product_id.
std::vector<std::string> rank_instance(const GBDTModel& model, const RankingInstance& instance);

double behavioral_gain_share(const GBDTModel& model, const FeatureSchema& schema);

/// CSV `feature_id,name,kind,gain,share`.
std::string gain_report_csv(const GBDTModel& model);

void write_model(std::ostream& out, const GBDTModel& model);
GBDTModel read_model(std::istream& in, const FeatureSchema& schema);
void save_model(const std::filesystem::path& path, const GBDTModel& model);
GBDTModel load_model(const std::filesystem::path& path, const FeatureSchema& schema);

}  // namespace ace::rank
