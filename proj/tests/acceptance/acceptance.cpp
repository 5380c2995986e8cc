// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <streambuf>
#include <string>
#include <vector>

#include "ace/analysis.hpp"
#include "ace/commands.hpp"
#include "ace/config.hpp"
#include "ace/curation.hpp"
#include "ace/io.hpp"
#include "ace/random.hpp"
#include "ace/ranker.hpp"
#include "ace/theory.hpp"

namespace fs = std::filesystem;
using namespace ace;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct NullBuf : std::streambuf {
  int overflow(int c) override { return c; }
};

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

bool all_passed = true;

void report(int id, const std::string& name, Outcome o, double elapsed, double limit) {
  if (limit > 0 && elapsed >= limit) {
    o.require(false, "runtime " + std::to_string(elapsed) + " s over " + std::to_string(limit) + " s");
  }
  all_passed = all_passed && o.ok;
  std::printf("%s %d %s (%.3f s)%s%s\n", o.ok ? "PASS" : "FAIL", id, name.c_str(), elapsed,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

Outcome c1_identity() {
  Outcome o;
  for (int m = 1; m <= 64; ++m) {
    for (int k = 0; k <= 100; ++k) {
      const double p = k / 100.0;
      const double lhs = theory::aggregated_unexplained_variance(p, m);
      const double rhs = theory::unexplained_variance(theory::aggregated_positive_prob(p, m));
      o.require(std::abs(lhs - rhs) <= 1e-12, "identity at p=" + std::to_string(p));
      const double pt = theory::aggregated_positive_prob(p, m);
      o.require(pt >= p - 1e-15 && pt >= 0 && pt <= 1, "p~ range");
      if (k < 100) {
        o.require(pt <= theory::aggregated_positive_prob((k + 1) / 100.0, m), "p~ monotone in p");
      }
      if (m < 64) o.require(pt <= theory::aggregated_positive_prob(p, m + 1), "p~ monotone in m");
    }
    o.require(theory::aggregated_positive_prob(0, m) == 0, "p~(0) != 0");
    o.require(theory::aggregated_positive_prob(1, m) == 1, "p~(1) != 1");
  }
  return o;
}

Outcome c2_optimal_weight() {
  Outcome o;
  Rng rng(derive_seed(2, "acceptance_pairs"));
  const int grid = 1'000'000;
  for (int t = 0; t < 1000; ++t) {
    theory::VariancePair pair{rng.uniform() * 0.25, rng.uniform() * 0.25};
    if (pair.e_bhv + pair.e_nbhv <= 0) pair.e_bhv = 0.1;
    double best_w = 0, best = theory::expected_mse(0, pair);
    for (int i = 1; i <= grid; ++i) {
      const double w = i / double(grid);
      const double v = pair.e_bhv * w * w + pair.e_nbhv * (1 - w) * (1 - w);
      if (v < best) best = v, best_w = w;
    }
    o.require(std::abs(best_w - theory::optimal_weight(pair)) <= 1e-6,
              "grid argmin differs on pair " + std::to_string(t));
  }
  for (const auto& spec : theory::reference_weight_specs(1'000'000, derive_seed(2, "acceptance_mc"))) {
    const auto r = theory::monte_carlo_weight(spec);
    o.require(std::abs(r.w_hat - r.w_star) <= 0.05,
              "Monte Carlo w_hat " + io::format_double(r.w_hat) + " vs " + io::format_double(r.w_star));
  }
  return o;
}

Outcome c3_weight_shift() {
  Outcome o;
  const std::vector<int> ms{1, 2, 4, 8, 16};
  const auto spec = theory::reference_shift_spec(1'000'000, derive_seed(3, "acceptance_shift"));
  const auto rows = theory::ace_weight_shift(spec, ms);
  const auto mc = theory::monte_carlo_weight_shift(spec, ms);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    o.require(rows[i].w_star < rows[i - 1].w_star, "w* not strictly decreasing");
    o.require(rows[i].e_bhv > rows[i - 1].e_bhv, "behavioral variance not increasing");
    o.require(rows[i].e_nbhv < rows[i - 1].e_nbhv, "non-behavioral variance not decreasing");
    o.require(mc[i].w_star < mc[i - 1].w_star, "sampled w* not strictly decreasing");
  }
  return o;
}

Outcome c4_figure1() {
  Outcome o;
  const std::vector<int> ms{1, 2, 5, 10, 20};
  const double step = 1e-3;
  const auto rows = theory::figure1_table(ms, step);
  double previous_half = 1;
  for (int m : ms) {
    double best = -1, arg = 0, half = -1;
    for (const auto& r : rows) {
      if (r.m != m) continue;
      if (r.epsilon_tilde > best) best = r.epsilon_tilde, arg = r.p;
      if (std::abs(r.p - 0.5) < step / 2) half = r.epsilon_tilde;
    }
    o.require(std::abs(arg - (1 - std::pow(2.0, -1.0 / m))) <= step + 1e-12,
              "argmax off for m=" + std::to_string(m));
    const double peak = theory::aggregated_unexplained_variance(theory::peak_probability(m), m);
    o.require(std::abs(peak - 0.25) <= 1e-9, "peak value off for m=" + std::to_string(m));
    o.require(best <= 0.25 + 1e-12, "table exceeds the peak for m=" + std::to_string(m));
    o.require(half >= 0 && half < previous_half, "value at 0.5 not decreasing");
    previous_half = half;
  }
  return o;
}

Outcome c5_ndcg() {
  Outcome o;
  Rng rng(derive_seed(5, "acceptance_ndcg"));
  for (int g = 0; g < 200; ++g) {
    const int n = 1 + static_cast<int>(rng.uniform() * 6);
    std::vector<int> grades(n);
    do {
      for (auto& x : grades) x = static_cast<int>(rng.uniform() * 6);
    } while (*std::max_element(grades.begin(), grades.end()) == 0);
    const int k = 1 + static_cast<int>(rng.uniform() * 6);
    auto dcg = [&](const std::vector<int>& order) {
      double d = 0;
      for (int r = 0; r < std::min(n, k); ++r) d += (std::pow(2.0, order[r]) - 1) / std::log2(r + 2.0);
      return d;
    };
    std::vector<int> perm = grades;
    std::sort(perm.begin(), perm.end());
    double ideal = 0;
    std::vector<std::vector<int>> all;
    do {
      ideal = std::max(ideal, dcg(perm));
      all.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    o.require(std::abs(rank::ideal_dcg(grades, k) - ideal) <= 1e-12, "ideal DCG mismatch");
    for (const auto& p : all) {
      o.require(std::abs(analysis::ndcg_at_k(p, k) - dcg(p) / ideal) <= 1e-12, "NDCG mismatch");
    }
  }
  return o;
}

Outcome c6_curation(const std::vector<std::vector<SearchEvent>>& logs, double& elapsed) {
  Outcome o;
  const auto schema = sim::default_schema();
  const auto t0 = Clock::now();
  for (const auto& events : logs) {
    std::map<int, std::vector<SearchEvent>> by_day;
    for (const auto& ev : events) by_day[ev.day].push_back(ev);
    o.require(by_day.size() == 21, "log covers " + std::to_string(by_day.size()) + " days");
    for (const auto& [day, evs] : by_day) {
      long raw = 0;
      for (const auto& ev : evs) {
        for (const auto& r : ev.results) raw += r.label;
      }
      long agg = 0;
      std::vector<int> positives;
      for (const auto& rec : curation::aggregate_day(evs)) {
        agg += rec.l_tilde;
        if (rec.l_tilde > 0) positives.push_back(rec.l_tilde);
      }
      o.require(raw == agg, "label mass not conserved on day " + std::to_string(day));
      const auto buckets = curation::quantile_bucket(positives, 6);
      for (auto a = buckets.begin(); a != buckets.end(); ++a) {
        for (auto b = std::next(a); b != buckets.end(); ++b) {
          o.require(a->second <= b->second, "bucketing not monotone");
        }
        o.require(a->second >= 1 && a->second <= 5, "bucket out of range");
      }
    }
    const auto ace_ds = curation::build_ace(events, schema, {});
    std::set<std::string> keys;
    for (const auto& inst : ace_ds.instances) {
      o.require(keys.insert(inst.group_key).second, "duplicate ACE group key " + inst.group_key);
    }
  }
  elapsed = seconds_since(t0);
  return o;
}

struct PipelineResult {
  double gain_ice = 0, gain_ace = 0, ratio = 0;
  double ab_imp = 0, ab_click = 0, ab_purchase = 0;
  double dq_ice = 0, dq_ace = 0, dp_ice = 0, dp_ace = 0;
  std::size_t records = 0;
  double seconds = 0;
  int status = 0;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

PipelineResult run_pipeline(std::uint64_t seed, const fs::path& out) {
  cli::RunConfig c;
  c.seed = seed;
  c.out = out;
  c = cli::finalize(c);
  fs::remove_all(out);
  NullBuf buf;
  std::ostream sink(&buf);
  PipelineResult r;
  const auto t0 = Clock::now();
  r.status = cli::cmd_pipeline(c, sink);
  r.seconds = seconds_since(t0);
  const auto text = io::read_text_file(cli::layout_for(out).summary);
  auto grab = [&](const std::string& pattern, std::vector<double*> into) {
    std::smatch m;
    if (!std::regex_search(text, m, std::regex(pattern))) throw Error("summary lacks " + pattern);
    for (std::size_t i = 0; i < into.size(); ++i) *into[i] = std::stod(m[i + 1]);
  };
  const std::string num = "(\\S+)";
  grab("behavioral_gain_share ICE " + num + " ACE " + num, {&r.gain_ice, &r.gain_ace});
  grab("ratio " + num, {&r.ratio});
  grab("impressions " + num + " clicks " + num + " purchases " + num,
       {&r.ab_imp, &r.ab_click, &r.ab_purchase});
  grab("distinct_query_fraction ICE " + num + " ACE " + num, {&r.dq_ice, &r.dq_ace});
  grab("distinct_pair_fraction ICE " + num + " ACE " + num, {&r.dp_ice, &r.dp_ace});
  const auto schema = sim::default_schema();
  for (const auto& ev : io::load_event_log(cli::layout_for(out).events, schema)) {
    r.records += ev.results.size();
  }
  return r;
}

std::string fmt(double v) { return io::format_double(v); }

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_text_file(e.path());
  }
  return files;
}

}  // namespace

int main() {
  const fs::path runs = fs::current_path() / "acceptance_runs";

  auto timed = [](auto&& f, double& elapsed) {
    const auto t0 = Clock::now();
    auto o = f();
    elapsed = seconds_since(t0);
    return o;
  };
  double t = 0;
  auto guarded = [&](int id, const std::string& name, double limit, std::function<Outcome()> f) {
    Outcome o;
    try {
      o = timed(f, t);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    report(id, name, o, t, limit);
  };

  guarded(1, "theory identity suite", 1, c1_identity);
  guarded(2, "optimal weight grid and Monte Carlo", 30, c2_optimal_weight);
  guarded(3, "ACE weight shift", 5, c3_weight_shift);
  guarded(4, "figure 1 reproduction", 1, c4_figure1);
  guarded(5, "NDCG brute-force oracle", 5, c5_ndcg);

  try {
    std::vector<std::vector<SearchEvent>> logs;
    for (std::uint64_t seed : {1, 2, 3}) {
      cli::RunConfig c;
      c.seed = seed;
      logs.push_back(cli::run_warmup(cli::finalize(c)).events);
    }
    double elapsed = 0;
    const auto outcome = c6_curation(logs, elapsed);
    report(6, "curation conservation and bucketing", outcome, elapsed, 10);
  } catch (const std::exception& e) {
    Outcome o;
    o.require(false, std::string("exception: ") + e.what());
    report(6, "curation conservation and bucketing", o, 0, 10);
  }

  std::vector<PipelineResult> results;
  double pipeline_seconds = 0;
  Outcome setup;
  try {
    for (std::uint64_t seed : {1, 2, 3}) {
      results.push_back(run_pipeline(seed, runs / ("seed_" + std::to_string(seed))));
      pipeline_seconds += results.back().seconds;
    }
  } catch (const std::exception& e) {
    setup.require(false, std::string("exception: ") + e.what());
  }

  {
    Outcome o = setup;
    std::vector<double> gi, ga;
    for (const auto& r : results) {
      gi.push_back(r.gain_ice), ga.push_back(r.gain_ace);
      o.require(r.records >= 100'000, "only " + std::to_string(r.records) + " result records");
    }
    if (o.ok) {
      o.require(median(ga) < median(gi), "median gain share ACE " + fmt(median(ga)) +
                                             " not below ICE " + fmt(median(gi)));
      if (o.ok) o.detail = "median gain share ICE " + fmt(median(gi)) + " ACE " + fmt(median(ga));
    }
    report(7, "directional behavioral gain share", o, pipeline_seconds, 180);
  }
  {
    Outcome o = setup;
    std::vector<double> ratio, imp, click, purchase;
    for (const auto& r : results) {
      ratio.push_back(r.ratio), imp.push_back(r.ab_imp), click.push_back(r.ab_click),
          purchase.push_back(r.ab_purchase);
    }
    if (o.ok) {
      const std::string summary = "median ratio " + fmt(median(ratio)) + ", A/B deltas " +
                                  fmt(median(imp)) + " / " + fmt(median(click)) + " / " +
                                  fmt(median(purchase)) + " %";
      o.require(median(ratio) >= 1.1 && median(imp) > 0 && median(click) > 0 && median(purchase) > 0,
                summary);
      if (o.ok) o.detail = summary;
    }
    report(8, "directional cold start", o, pipeline_seconds, 180);
  }
  {
    Outcome o = setup;
    double elapsed = 0;
    try {
      const auto t0 = Clock::now();
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        o.require(r.dq_ace > r.dq_ice && r.dp_ace > r.dp_ice,
                  "seed " + std::to_string(i + 1) + ": query " + fmt(r.dq_ice) + " vs " +
                      fmt(r.dq_ace) + ", pair " + fmt(r.dp_ice) + " vs " + fmt(r.dp_ace));
        // Recompute from the stored log to time the diversity statistics alone.
        const auto layout = cli::layout_for(runs / ("seed_" + std::to_string(i + 1)));
        const auto schema = sim::default_schema();
        const auto events = io::load_event_log(layout.events, schema);
        const auto stats = curation::dataset_stats(events, curation::build_ice(events, schema),
                                                   curation::build_ace(events, schema, {}));
        o.require(stats.ace.distinct_query_fraction == r.dq_ace, "recomputed fraction differs");
      }
      elapsed = seconds_since(t0);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    report(9, "directional diversity", o, elapsed, 10);
  }
  {
    Outcome o = setup;
    double elapsed = 0;
    try {
      if (o.ok) {
        const auto a = snapshot(runs / "seed_1");
        const auto again = run_pipeline(1, runs / "seed_1");
        elapsed = again.seconds;
        const auto b = snapshot(runs / "seed_1");
        o.require(a.size() == b.size() && !a.empty(), "different file sets");
        for (const auto& [name, content] : a) {
          const auto it = b.find(name);
          o.require(it != b.end() && it->second == content, "differs: " + name);
        }
      }
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    report(10, "determinism", o, elapsed, 0);
  }
  return all_passed ? 0 : 1;
}
