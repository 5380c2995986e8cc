#include "ace/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ace/io.hpp"

namespace ace::rank {

void validate(const TrainConfig& c) {
  if (c.num_trees < 0) throw Error("train.num_trees: must be >= 0");
  if (!(c.learning_rate > 0 && c.learning_rate <= 1)) {
    throw Error("train.learning_rate: must be in (0, 1]");
  }
  if (c.max_leaves < 2) throw Error("train.max_leaves: must be >= 2");
  if (c.min_items_per_leaf < 1) throw Error("train.min_items_per_leaf: must be >= 1");
  if (c.ndcg_truncation < 1) throw Error("train.ndcg_truncation: must be >= 1");
  if (!(c.sigmoid_scale > 0)) throw Error("train.sigmoid_scale: must be > 0");
}

double ndcg_gain(int grade) { return std::ldexp(1.0, grade) - 1.0; }

double ndcg_discount(int rank) { return 1.0 / std::log2(1.0 + rank); }

double ideal_dcg(std::span<const int> grades, int k) {
  std::vector<int> sorted(grades.begin(), grades.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double dcg = 0;
  const std::size_t top = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < top; ++r) dcg += ndcg_gain(sorted[r]) * ndcg_discount(r + 1);
  return dcg;
}

LambdaResult lambda_gradients(std::span<const double> scores, std::span<const int> grades,
                              int k, double sigma) {
  if (scores.size() != grades.size()) {
    throw Error("lambda_gradients: scores and grades differ in length");
  }
  const std::size_t n = scores.size();
  LambdaResult out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double ideal = ideal_dcg(grades, k);
  if (ideal <= 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> discount(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (static_cast<int>(r) < k) discount[order[r]] = ndcg_discount(static_cast<int>(r) + 1);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (grades[i] <= grades[j]) continue;
      const double delta = std::abs((ndcg_gain(grades[i]) - ndcg_gain(grades[j])) *
                                    (discount[i] - discount[j])) / ideal;
      if (delta == 0) continue;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double lambda = sigma * rho * delta;
      const double hess = sigma * sigma * rho * (1.0 - rho) * delta;
      out.gradients[i] -= lambda;
      out.gradients[j] += lambda;
      out.hessians[i] += hess;
      out.hessians[j] += hess;
    }
  }
  return out;
}

double Tree::predict(std::span<const double> features) const {
  if (nodes.empty()) return 0.0;
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = features[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[id].value;
}

namespace {

constexpr double kLeafRegularization = 1.0;

struct SplitCandidate {
  double gain = 0;
  int feature = -1;
  double threshold = 0;
};

struct Leaf {
  int node_id = 0;
  std::vector<std::vector<std::uint32_t>> sorted;  // per feature, node items by value
  double grad_sum = 0;
  double hess_sum = 0;
  SplitCandidate best;
};

double leaf_objective(double g, double h) { return g * g / (h + kLeafRegularization); }

// Column-major feature matrix over all dataset items.
struct Columns {
  std::size_t rows = 0;
  std::vector<std::vector<double>> values;
};

class TreeBuilder {
 public:
  TreeBuilder(const Columns& cols, const std::vector<std::vector<std::uint32_t>>& presorted,
              const TrainConfig& config)
      : cols_(cols), presorted_(presorted), config_(config) {}

  // Returns the tree and writes each item's leaf value into `leaf_value`.
  Tree build(const std::vector<double>& grad, const std::vector<double>& hess,
             std::vector<double>& feature_gain, std::vector<double>& leaf_value) {
    grad_ = &grad;
    hess_ = &hess;
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    {
      Leaf root;
      root.node_id = 0;
      root.sorted = presorted_;
      for (std::size_t i = 0; i < cols_.rows; ++i) {
        root.grad_sum += grad[i];
        root.hess_sum += hess[i];
      }
      find_best_split(root);
      leaves.push_back(std::move(root));
    }

    while (static_cast<int>(leaves.size()) < config_.max_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t l = 0; l < leaves.size(); ++l) {
        if (leaves[l].best.feature < 0) continue;
        if (pick == leaves.size() || leaves[l].best.gain > leaves[pick].best.gain) pick = l;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
      feature_gain[parent.best.feature] += parent.best.gain;

      const int left_id = static_cast<int>(tree.nodes.size());
      const int right_id = left_id + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[parent.node_id];
      node.feature = parent.best.feature;
      node.threshold = parent.best.threshold;
      node.left = left_id;
      node.right = right_id;

      Leaf left, right;
      left.node_id = left_id;
      right.node_id = right_id;
      split_leaf(parent, left, right);
      find_best_split(left);
      find_best_split(right);
      leaves.push_back(std::move(left));
      leaves.push_back(std::move(right));
    }

    for (const auto& leaf : leaves) {
      const double value = -leaf.grad_sum / (leaf.hess_sum + kLeafRegularization);
      tree.nodes[leaf.node_id].value = value;
      for (std::uint32_t i : leaf.sorted[0]) leaf_value[i] = value;
    }
    return tree;
  }

 private:
  void find_best_split(Leaf& leaf) const {
    leaf.best = {};
    const std::size_t n = leaf.sorted[0].size();
    const std::size_t min_leaf = static_cast<std::size_t>(config_.min_items_per_leaf);
    if (n < 2 * min_leaf) return;
    const double parent = leaf_objective(leaf.grad_sum, leaf.hess_sum);
    for (std::size_t f = 0; f < cols_.values.size(); ++f) {
      const auto& order = leaf.sorted[f];
      const auto& v = cols_.values[f];
      double gl = 0, hl = 0;
      for (std::size_t t = 0; t + 1 < n; ++t) {
        gl += (*grad_)[order[t]];
        hl += (*hess_)[order[t]];
        const double a = v[order[t]];
        const double b = v[order[t + 1]];
        if (!(a < b)) continue;
        const std::size_t nl = t + 1;
        if (nl < min_leaf) continue;
        if (n - nl < min_leaf) break;
        const double gain = 0.5 * (leaf_objective(gl, hl) +
                                   leaf_objective(leaf.grad_sum - gl, leaf.hess_sum - hl) -
                                   parent);
        if (gain > leaf.best.gain) {
          double mid = a + (b - a) / 2;
          if (!(mid < b)) mid = a;
          leaf.best = {gain, static_cast<int>(f), mid};
        }
      }
    }
  }

  void split_leaf(const Leaf& parent, Leaf& left, Leaf& right) {
    const auto& column = cols_.values[parent.best.feature];
    const double threshold = parent.best.threshold;
    const std::size_t d = parent.sorted.size();
    left.sorted.resize(d);
    right.sorted.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      for (std::uint32_t i : parent.sorted[f]) {
        (column[i] <= threshold ? left.sorted[f] : right.sorted[f]).push_back(i);
      }
    }
    for (std::uint32_t i : left.sorted[0]) {
      left.grad_sum += (*grad_)[i];
      left.hess_sum += (*hess_)[i];
    }
    for (std::uint32_t i : right.sorted[0]) {
      right.grad_sum += (*grad_)[i];
      right.hess_sum += (*hess_)[i];
    }
  }

  const Columns& cols_;
  const std::vector<std::vector<std::uint32_t>>& presorted_;
  const TrainConfig& config_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
};

}  // namespace

GBDTModel fit(const Dataset& dataset, const TrainConfig& config, const FitObserver& observer) {
  validate(config);
  require_valid(validate_dataset(dataset));
  const std::size_t d = dataset.schema.size();

  // Flatten items; remember group boundaries.
  Columns cols;
  cols.values.assign(d, {});
  std::vector<int> grades;
  std::vector<std::size_t> group_start{0};
  bool trainable = false;
  for (const auto& inst : dataset.instances) {
    bool mixed = false;
    for (const auto& item : inst.items) {
      for (std::size_t f = 0; f < d; ++f) cols.values[f].push_back(item.features[f]);
      grades.push_back(item.grade);
      mixed |= item.grade != inst.items.front().grade;
    }
    group_start.push_back(grades.size());
    trainable |= mixed;
  }
  cols.rows = grades.size();
  if (!trainable) throw Error("fit: degenerate dataset, no group has differing grades");

  std::vector<std::vector<std::uint32_t>> presorted(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& order = presorted[f];
    order.resize(cols.rows);
    std::iota(order.begin(), order.end(), 0u);
    const auto& v = cols.values[f];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
  }

  GBDTModel model;
  model.schema = dataset.schema;
  model.base_score = 0;
  model.learning_rate = config.learning_rate;
  model.per_feature_gain.assign(d, 0.0);

  std::vector<double> scores(cols.rows, model.base_score);
  LambdaResult all{std::vector<double>(cols.rows), std::vector<double>(cols.rows)};
  std::vector<double> leaf_value(cols.rows, 0.0);
  TreeBuilder builder(cols, presorted, config);

  for (int it = 0; it < config.num_trees; ++it) {
    for (std::size_t g = 0; g + 1 < group_start.size(); ++g) {
      const std::size_t lo = group_start[g];
      const std::size_t len = group_start[g + 1] - lo;
      auto lr = lambda_gradients(std::span(scores).subspan(lo, len),
                                 std::span(grades).subspan(lo, len),
                                 config.ndcg_truncation, config.sigmoid_scale);
      std::copy(lr.gradients.begin(), lr.gradients.end(), all.gradients.begin() + lo);
      std::copy(lr.hessians.begin(), lr.hessians.end(), all.hessians.begin() + lo);
    }
    model.trees.push_back(
        builder.build(all.gradients, all.hessians, model.per_feature_gain, leaf_value));
    for (std::size_t i = 0; i < cols.rows; ++i) {
      scores[i] += model.learning_rate * leaf_value[i];
    }
    if (observer) observer(it, all, model);
  }
  return model;
}

double score(const GBDTModel& model, std::span<const double> features) {
  if (features.size() != model.schema.size()) {
    throw Error("score: feature length " + std::to_string(features.size()) +
                " does not match schema dimension " + std::to_string(model.schema.size()));
  }
  double sum = 0;
  for (const auto& tree : model.trees) sum += tree.predict(features);
  return model.base_score + model.learning_rate * sum;
}

std::vector<std::string> rank_instance(const GBDTModel& model, const RankingInstance& instance) {
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(instance.items.size());
  for (const auto& item : instance.items) {
    scored.emplace_back(score(model, item.features), &item.product_id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (const auto& [s, id] : scored) out.push_back(*id);
  return out;
}

double behavioral_gain_share(const GBDTModel& model, const FeatureSchema& schema) {
  double total = 0, behavioral = 0;
  for (std::size_t f = 0; f < model.per_feature_gain.size(); ++f) {
    total += model.per_feature_gain[f];
    if (schema.is_behavioral(f)) behavioral += model.per_feature_gain[f];
  }
  return total > 0 ? behavioral / total : 0.0;
}

std::string gain_report_csv(const GBDTModel& model) {
  const double total =
      std::accumulate(model.per_feature_gain.begin(), model.per_feature_gain.end(), 0.0);
  std::ostringstream out;
  out << "feature_id,name,kind,gain,share\n";
  for (std::size_t f = 0; f < model.per_feature_gain.size(); ++f) {
    const auto& spec = model.schema[f];
    const double share = total > 0 ? model.per_feature_gain[f] / total : 0.0;
    out << spec.id << ',' << spec.name << ',' << to_string(spec.kind) << ','
        << io::format_double(model.per_feature_gain[f]) << ',' << io::format_double(share)
        << '\n';
  }
  return out.str();
}

void write_model(std::ostream& out, const GBDTModel& model) {
  using io::format_double;
  out << "ace-gbdt-model v1 base_score=" << format_double(model.base_score)
      << " learning_rate=" << format_double(model.learning_rate)
      << " schema=" << model.schema.digest() << " trees=" << model.trees.size() << '\n';
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& nodes = model.trees[t].nodes;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const auto& n = nodes[id];
      out << t << ' ' << id << ' ' << (n.is_leaf() ? "leaf" : "split") << ' ' << n.feature
          << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << format_double(n.value) << '\n';
    }
  }
  for (std::size_t f = 0; f < model.per_feature_gain.size(); ++f) {
    out << "gain " << f << ' ' << format_double(model.per_feature_gain[f]) << '\n';
  }
}

GBDTModel read_model(std::istream& in, const FeatureSchema& schema) {
  GBDTModel model;
  model.schema = schema;
  model.per_feature_gain.assign(schema.size(), 0.0);
  std::string line;
  if (!std::getline(in, line)) throw Error("model: missing header");
  {
    std::istringstream hs(line);
    std::string magic, version, base, rate, digest, trees;
    hs >> magic >> version >> base >> rate >> digest >> trees;
    auto value_of = [](const std::string& tok, const std::string& key) {
      if (tok.rfind(key + "=", 0) != 0) throw Error("model: header lacks " + key);
      return tok.substr(key.size() + 1);
    };
    if (magic != "ace-gbdt-model" || version != "v1") throw Error("model: unsupported header");
    model.base_score = io::parse_double(value_of(base, "base_score"));
    model.learning_rate = io::parse_double(value_of(rate, "learning_rate"));
    if (value_of(digest, "schema") != schema.digest()) throw Error("model: schema digest mismatch");
    model.trees.resize(std::stoul(value_of(trees, "trees")));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "gain") {
      std::size_t f;
      std::string v;
      ls >> f >> v;
      if (!ls || f >= schema.size()) throw Error("model: bad gain line");
      model.per_feature_gain[f] = io::parse_double(v);
      continue;
    }
    std::size_t tree_id = std::stoul(first), node_id;
    std::string kind, threshold, value;
    TreeNode node;
    ls >> node_id >> kind >> node.feature >> threshold >> node.left >> node.right >> value;
    if (!ls || tree_id >= model.trees.size()) throw Error("model: bad node line: " + line);
    node.threshold = io::parse_double(threshold);
    node.value = io::parse_double(value);
    if ((kind == "leaf") != node.is_leaf()) throw Error("model: node kind mismatch: " + line);
    if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= schema.size()) {
      throw Error("model: split feature outside schema");
    }
    auto& nodes = model.trees[tree_id].nodes;
    if (node_id != nodes.size()) throw Error("model: nodes out of order");
    nodes.push_back(node);
  }
  return model;
}

void save_model(const std::filesystem::path& path, const GBDTModel& model) {
  std::ostringstream out;
  write_model(out, model);
  io::write_text_file(path, out.str());
}

GBDTModel load_model(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return read_model(in, schema);
}

}  // namespace ace::rank
