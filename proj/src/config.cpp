#include "ace/config.hpp"

#include <charconv>
#include <sstream>

#include "ace/io.hpp"
#include "ace/random.hpp"

namespace ace::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integral(const std::string& key, const std::string& value) {
  T v{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error("config " + key + ": cannot parse '" + value + "' as integer");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return io::parse_double(value);
  } catch (const Error&) {
    throw Error("config " + key + ": cannot parse '" + value + "' as a real number");
  }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_integral<int>(key, trim(item)));
  if (out.empty()) throw Error("config " + key + ": empty list");
  return out;
}

std::string join(const std::vector<int>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(values[i]);
  }
  return s;
}

}  // namespace

void set_value(RunConfig& c, const std::string& key, const std::string& value) {
  auto i = [&](auto& field) { field = parse_integral<std::decay_t<decltype(field)>>(key, value); };
  auto r = [&](double& field) { field = parse_real(key, value); };
  if (key == "seed") return i(c.seed);
  if (key == "out") { c.out = value; return; }
  if (key == "sim.num_queries") return i(c.sim.num_queries);
  if (key == "sim.catalog_size") return i(c.sim.catalog_size);
  if (key == "sim.num_days") return i(c.sim.num_days);
  if (key == "sim.sessions_per_day") return i(c.sim.sessions_per_day);
  if (key == "sim.query_zipf_exponent") return r(c.sim.query_zipf_exponent);
  if (key == "sim.results_per_page") return i(c.sim.results_per_page);
  if (key == "sim.exam_decay") return r(c.sim.exam_decay);
  if (key == "sim.affinity_mean") return r(c.sim.affinity_mean);
  if (key == "sim.affinity_concentration") return r(c.sim.affinity_concentration);
  if (key == "sim.text_match_noise_sd") return r(c.sim.text_match_noise_sd);
  if (key == "sim.new_products_per_day") return i(c.sim.new_products_per_day);
  if (key == "sim.purchase_given_click") return r(c.sim.purchase_given_click);
  if (key == "sim.ctr_alpha") return r(c.sim.ctr_alpha);
  if (key == "sim.ctr_beta") return r(c.sim.ctr_beta);
  if (key == "curation.num_buckets") return i(c.curation.num_buckets);
  if (key == "train.num_trees") return i(c.train.num_trees);
  if (key == "train.learning_rate") return r(c.train.learning_rate);
  if (key == "train.max_leaves") return i(c.train.max_leaves);
  if (key == "train.min_items_per_leaf") return i(c.train.min_items_per_leaf);
  if (key == "train.ndcg_truncation") return i(c.train.ndcg_truncation);
  if (key == "train.sigmoid_scale") return r(c.train.sigmoid_scale);
  if (key == "eval.k") return i(c.eval.k);
  if (key == "eval.offline_age_days") return i(c.eval.offline_age_days);
  if (key == "eval.offline_days") return i(c.eval.offline_days);
  if (key == "eval.ab_age_days") return i(c.eval.ab_age_days);
  if (key == "eval.horizon_days") return i(c.eval.horizon_days);
  if (key == "theory.m_values") { c.theory.m_values = parse_int_list(key, value); return; }
  if (key == "theory.grid_step") return r(c.theory.grid_step);
  if (key == "theory.sample_count") return i(c.theory.sample_count);
  throw Error("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    set_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  return parse_config(io::read_text_file(path), std::move(base));
}

RunConfig finalize(RunConfig c) {
  c.sim.seed = derive_seed(c.seed, "sim");
  c.train.seed = derive_seed(c.seed, "train");
  sim::validate(c.sim);
  curation::validate(c.curation);
  rank::validate(c.train);
  if (c.eval.k < 1) throw Error("eval.k: must be >= 1");
  if (c.eval.offline_days < 1) throw Error("eval.offline_days: must be >= 1");
  if (c.eval.horizon_days < 1) throw Error("eval.horizon_days: empty horizon");
  if (c.eval.offline_age_days < 1) throw Error("eval.offline_age_days: must be >= 1");
  if (c.eval.ab_age_days < 1) throw Error("eval.ab_age_days: must be >= 1");
  for (int m : c.theory.m_values) {
    if (m < 1) throw Error("theory.m_values: every m must be >= 1");
  }
  if (!(c.theory.grid_step > 0 && c.theory.grid_step <= 0.5)) {
    throw Error("theory.grid_step: must be in (0, 0.5]");
  }
  if (c.theory.sample_count < 1) throw Error("theory.sample_count: must be >= 1");
  return c;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  using io::format_double;
  auto s = [](auto v) { return std::to_string(v); };
  return {
      {"seed", s(c.seed)},
      {"out", c.out.string()},
      {"sim.num_queries", s(c.sim.num_queries)},
      {"sim.catalog_size", s(c.sim.catalog_size)},
      {"sim.num_days", s(c.sim.num_days)},
      {"sim.sessions_per_day", s(c.sim.sessions_per_day)},
      {"sim.query_zipf_exponent", format_double(c.sim.query_zipf_exponent)},
      {"sim.results_per_page", s(c.sim.results_per_page)},
      {"sim.exam_decay", format_double(c.sim.exam_decay)},
      {"sim.affinity_mean", format_double(c.sim.affinity_mean)},
      {"sim.affinity_concentration", format_double(c.sim.affinity_concentration)},
      {"sim.text_match_noise_sd", format_double(c.sim.text_match_noise_sd)},
      {"sim.new_products_per_day", s(c.sim.new_products_per_day)},
      {"sim.purchase_given_click", format_double(c.sim.purchase_given_click)},
      {"sim.ctr_alpha", format_double(c.sim.ctr_alpha)},
      {"sim.ctr_beta", format_double(c.sim.ctr_beta)},
      {"curation.num_buckets", s(c.curation.num_buckets)},
      {"train.num_trees", s(c.train.num_trees)},
      {"train.learning_rate", format_double(c.train.learning_rate)},
      {"train.max_leaves", s(c.train.max_leaves)},
      {"train.min_items_per_leaf", s(c.train.min_items_per_leaf)},
      {"train.ndcg_truncation", s(c.train.ndcg_truncation)},
      {"train.sigmoid_scale", format_double(c.train.sigmoid_scale)},
      {"eval.k", s(c.eval.k)},
      {"eval.offline_age_days", s(c.eval.offline_age_days)},
      {"eval.offline_days", s(c.eval.offline_days)},
      {"eval.ab_age_days", s(c.eval.ab_age_days)},
      {"eval.horizon_days", s(c.eval.horizon_days)},
      {"theory.m_values", join(c.theory.m_values)},
      {"theory.grid_step", format_double(c.theory.grid_step)},
      {"theory.sample_count", s(c.theory.sample_count)},
  };
}

}  // namespace ace::cli
