#include "ace/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ace/core.hpp"
#include "ace/io.hpp"
#include "ace/random.hpp"

namespace ace::theory {
namespace {

void check_p(double p, const char* op) {
  if (!(p >= 0 && p <= 1)) throw Error(std::string(op) + ": p outside [0, 1]");
}

void check_m(int m, const char* op) {
  if (m < 1) throw Error(std::string(op) + ": m must be >= 1");
}

constexpr double kMassTolerance = 1e-9;
constexpr double kMaxResidueCorrelation = 0.02;
constexpr double kWeightGridStep = 1e-3;

}  // namespace

double aggregated_positive_prob(double p, int m) {
  check_p(p, "aggregated_positive_prob");
  check_m(m, "aggregated_positive_prob");
  return 1.0 - std::pow(1.0 - p, m);
}

double unexplained_variance(double p) {
  check_p(p, "unexplained_variance");
  return p * (1.0 - p);
}

double aggregated_unexplained_variance(double p, int m) {
  check_p(p, "aggregated_unexplained_variance");
  check_m(m, "aggregated_unexplained_variance");
  const double q = std::pow(1.0 - p, m);
  return (1.0 - q) * q;
}

double peak_probability(int m) {
  check_m(m, "peak_probability");
  return 1.0 - std::pow(2.0, -1.0 / m);
}

double expected_mse(double w, const VariancePair& pair) {
  if (!(w >= 0 && w <= 1)) throw Error("expected_mse: w outside [0, 1]");
  return w * w * pair.e_bhv + (1 - w) * (1 - w) * pair.e_nbhv;
}

double optimal_weight(const VariancePair& pair) {
  if (pair.e_bhv < 0 || pair.e_nbhv < 0) throw Error("optimal_weight: negative variance");
  const double total = pair.e_bhv + pair.e_nbhv;
  if (!(total > 0)) throw Error("optimal_weight: degenerate (both variances zero)");
  return pair.e_nbhv / total;
}

int extreme_cutoff_label(std::span<const int> labels) {
  if (labels.empty()) throw Error("extreme_cutoff_label: empty label list");
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("extreme_cutoff_label: non-binary label");
  }
  return std::find(labels.begin(), labels.end(), 1) != labels.end() ? 1 : 0;
}

std::vector<CurveRow> figure1_table(std::span<const int> m_values, double step) {
  if (!(step > 0 && step <= 0.5)) throw Error("figure1_table: step must be in (0, 0.5]");
  const auto points = static_cast<long long>(std::ceil(1.0 / step - 1e-9));
  std::vector<CurveRow> rows;
  rows.reserve(m_values.size() * static_cast<std::size_t>(points + 1));
  for (int m : m_values) {
    for (long long k = 0; k <= points; ++k) {
      const double p = std::min(1.0, static_cast<double>(k) * step);
      rows.push_back({m, p, aggregated_unexplained_variance(p, m)});
    }
  }
  return rows;
}

std::string figure1_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "m,p,epsilon_tilde\n";
  for (const auto& r : rows) {
    out << r.m << ',' << io::format_double(r.p) << ',' << io::format_double(r.epsilon_tilde)
        << '\n';
  }
  return out.str();
}

void validate(const PDistribution& dist, const char* name) {
  if (dist.empty()) throw Error(std::string(name) + ": empty distribution");
  double total = 0;
  for (const auto& pm : dist) {
    if (!(pm.p >= 0 && pm.p <= 1)) throw Error(std::string(name) + ": p outside [0, 1]");
    if (!(pm.mass >= 0)) throw Error(std::string(name) + ": negative mass");
    total += pm.mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw Error(std::string(name) + ": masses sum to " + io::format_double(total) + ", not 1");
  }
}

double mean_p(const PDistribution& dist) {
  double mean = 0;
  for (const auto& pm : dist) mean += pm.p * pm.mass;
  return mean;
}

double expected_unexplained_variance(const PDistribution& dist, int m) {
  double e = 0;
  for (const auto& pm : dist) e += pm.mass * aggregated_unexplained_variance(pm.p, m);
  return e;
}

namespace {

struct Segment {
  double start = 0;
  double end = 0;
  std::size_t value = 0;
};

bool uncertain(double p) { return p > 0 && p < 1; }

// Cells of one feature on [0,1): its positive pieces tile [0,mu), negative
// pieces tile [mu,1). `uncertain_first` packs 0<p<1 cells at the start of
// each half, otherwise at the end.
std::vector<Segment> layout(const PDistribution& dist, double mu, bool uncertain_first) {
  std::vector<Segment> segs;
  auto place = [&](double from, bool positive) {
    double at = from;
    for (int pass = 0; pass < 2; ++pass) {
      const bool want_uncertain = (pass == 0) == uncertain_first;
      for (std::size_t i = 0; i < dist.size(); ++i) {
        const auto& pm = dist[i];
        if (uncertain(pm.p) != want_uncertain) continue;
        const double len = positive ? pm.p * pm.mass : (1 - pm.p) * pm.mass;
        if (len <= 0) continue;
        segs.push_back({at, at + len, i});
        at += len;
      }
    }
  };
  place(0.0, true);
  place(mu, false);
  return segs;
}

std::size_t cell_at(const std::vector<Segment>& segs, double x) {
  auto it = std::upper_bound(segs.begin(), segs.end(), x,
                             [](double v, const Segment& s) { return v < s.end; });
  if (it == segs.end()) --it;
  return it->value;
}

struct JointCell {
  std::size_t bhv = 0;
  std::size_t nbhv = 0;
  double probability = 0;
  double positive_rate = 0;  // P(Y=1 | both cells)
};

std::vector<JointCell> joint_law(const GenerativeSpec& spec, double mu) {
  const auto b = layout(spec.bhv, mu, true);
  const auto n = layout(spec.nbhv, mu, false);
  std::vector<double> cuts{0.0, mu, 1.0};
  for (const auto& s : b) cuts.push_back(s.end);
  for (const auto& s : n) cuts.push_back(s.end);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t nb = spec.bhv.size(), nn = spec.nbhv.size();
  std::vector<double> pos(nb * nn, 0.0), neg(nb * nn, 0.0);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c], hi = std::min(cuts[c + 1], 1.0);
    if (!(hi > lo)) continue;
    const double mid = lo + (hi - lo) / 2;
    const std::size_t key = cell_at(b, mid) * nn + cell_at(n, mid);
    (mid < mu ? pos : neg)[key] += hi - lo;
  }
  std::vector<JointCell> cells;
  for (std::size_t key = 0; key < nb * nn; ++key) {
    const double total = pos[key] + neg[key];
    if (total <= 0) continue;
    cells.push_back({key / nn, key % nn, total, pos[key] / total});
  }
  return cells;
}

double common_mean(const GenerativeSpec& spec) {
  validate(spec.bhv, "bhv distribution");
  validate(spec.nbhv, "nbhv distribution");
  const double mb = mean_p(spec.bhv), mn = mean_p(spec.nbhv);
  if (std::abs(mb - mn) > kMassTolerance) {
    throw Error("generative spec: behavioral and non-behavioral distributions imply different "
                "label means (" + io::format_double(mb) + " vs " + io::format_double(mn) + ")");
  }
  return mb;
}

double uncertain_length(const PDistribution& dist, bool positive) {
  double len = 0;
  for (const auto& pm : dist) {
    if (uncertain(pm.p)) len += positive ? pm.p * pm.mass : (1 - pm.p) * pm.mass;
  }
  return len;
}

}  // namespace

bool admits_uncorrelated_residues(const GenerativeSpec& spec) {
  const double mu = common_mean(spec);
  const double eps = 1e-12;
  return uncertain_length(spec.bhv, true) + uncertain_length(spec.nbhv, true) <= mu + eps &&
         uncertain_length(spec.bhv, false) + uncertain_length(spec.nbhv, false) <= 1 - mu + eps;
}

MonteCarloResult monte_carlo_weight(const GenerativeSpec& spec) {
  check_m(spec.m, "monte_carlo_weight");
  if (spec.sample_count == 0) throw Error("monte_carlo_weight: sample_count must be >= 1");
  const double mu = common_mean(spec);
  const auto cells = joint_law(spec, mu);
  std::vector<double> cumulative;
  cumulative.reserve(cells.size());
  double acc = 0;
  for (const auto& c : cells) cumulative.push_back(acc += c.probability);

  // counts[cell][label]
  std::vector<std::array<double, 2>> counts(cells.size(), {0.0, 0.0});
  Rng rng(derive_seed(spec.seed, "monte_carlo_weight", {static_cast<std::uint64_t>(spec.m)}));
  for (std::size_t s = 0; s < spec.sample_count; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t c = std::min<std::size_t>(it - cumulative.begin(), cells.size() - 1);
    int label = 0;
    for (int i = 0; i < spec.m && label == 0; ++i) label = rng.bernoulli(cells[c].positive_rate);
    counts[c][label] += 1;
  }

  // Per-value conditional means.
  std::vector<double> b_sum(spec.bhv.size(), 0), b_n(spec.bhv.size(), 0);
  std::vector<double> n_sum(spec.nbhv.size(), 0), n_n(spec.nbhv.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double total = counts[c][0] + counts[c][1];
    b_sum[cells[c].bhv] += counts[c][1];
    b_n[cells[c].bhv] += total;
    n_sum[cells[c].nbhv] += counts[c][1];
    n_n[cells[c].nbhv] += total;
  }
  auto mean_of = [](double sum, double n) { return n > 0 ? sum / n : 0.0; };

  double sbb = 0, snn = 0, sbn = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double fb = mean_of(b_sum[cells[c].bhv], b_n[cells[c].bhv]);
    const double fn = mean_of(n_sum[cells[c].nbhv], n_n[cells[c].nbhv]);
    for (int y = 0; y < 2; ++y) {
      const double rb = y - fb, rn = y - fn;
      sbb += counts[c][y] * rb * rb;
      snn += counts[c][y] * rn * rn;
      sbn += counts[c][y] * rb * rn;
    }
  }
  const double n = static_cast<double>(spec.sample_count);
  sbb /= n;
  snn /= n;
  sbn /= n;

  MonteCarloResult result;
  result.e_bhv_hat = sbb;
  result.e_nbhv_hat = snn;
  result.residue_correlation = (sbb > 0 && snn > 0) ? sbn / std::sqrt(sbb * snn) : 0.0;
  if (result.residue_correlation > kMaxResidueCorrelation) {
    throw Error("monte_carlo_weight: uncorrelated-residue assumption violated (correlation " +
                io::format_double(result.residue_correlation) + ")");
  }
  result.w_star = optimal_weight({sbb, snn});

  const int steps = static_cast<int>(std::lround(1.0 / kWeightGridStep));
  double best = 0;
  for (int k = 0; k <= steps; ++k) {
    const double w = k * kWeightGridStep;
    const double mse = w * w * sbb + (1 - w) * (1 - w) * snn + 2 * w * (1 - w) * sbn;
    if (k == 0 || mse < best) {
      best = mse;
      result.w_hat = w;
    }
  }
  return result;
}

namespace {

void check_shift_premises(const GenerativeSpec& spec) {
  validate(spec.bhv, "bhv distribution");
  validate(spec.nbhv, "nbhv distribution");
  if (mean_p(spec.bhv) > 0.2) {
    throw Error("ace_weight_shift: behavioral mass is not left-skewed (mean p > 0.2)");
  }
  if (expected_unexplained_variance(spec.bhv, 1) <= 0) {
    throw Error("ace_weight_shift: behavioral distribution has no mass strictly inside (0, 1)");
  }
  double mid = 0;
  for (const auto& pm : spec.nbhv) {
    if (pm.p >= 0.3 && pm.p <= 0.7) mid += pm.mass;
  }
  if (mid < 0.8 - kMassTolerance) {
    throw Error("ace_weight_shift: non-behavioral mass is not mid-concentrated "
                "(mass in [0.3, 0.7] < 0.8)");
  }
}

}  // namespace

std::vector<WeightShiftRow> ace_weight_shift(const GenerativeSpec& spec,
                                             std::span<const int> m_values) {
  check_shift_premises(spec);
  std::vector<WeightShiftRow> rows;
  for (int m : m_values) {
    check_m(m, "ace_weight_shift");
    WeightShiftRow row{m, 0, expected_unexplained_variance(spec.bhv, m),
                       expected_unexplained_variance(spec.nbhv, m)};
    row.w_star = optimal_weight({row.e_bhv, row.e_nbhv});
    rows.push_back(row);
  }
  return rows;
}

namespace {

double sampled_variance(const PDistribution& dist, int m, std::size_t samples, Rng& rng) {
  std::vector<double> cumulative;
  double acc = 0;
  for (const auto& pm : dist) cumulative.push_back(acc += pm.mass);
  std::vector<double> ones(dist.size(), 0), total(dist.size(), 0);
  std::vector<int> labels(static_cast<std::size_t>(m));
  for (std::size_t s = 0; s < samples; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t v = std::min<std::size_t>(it - cumulative.begin(), dist.size() - 1);
    for (auto& y : labels) y = rng.bernoulli(dist[v].p) ? 1 : 0;
    ones[v] += extreme_cutoff_label(labels);
    total[v] += 1;
  }
  double e = 0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (total[v] == 0) continue;
    const double f = ones[v] / total[v];
    // Sum of squared residuals around the per-value mean.
    e += ones[v] * (1 - f) * (1 - f) + (total[v] - ones[v]) * f * f;
  }
  return e / static_cast<double>(samples);
}

}  // namespace

std::vector<WeightShiftRow> monte_carlo_weight_shift(const GenerativeSpec& spec,
                                                     std::span<const int> m_values) {
  validate(spec.bhv, "bhv distribution");
  validate(spec.nbhv, "nbhv distribution");
  std::vector<WeightShiftRow> rows;
  for (int m : m_values) {
    check_m(m, "monte_carlo_weight_shift");
    Rng rb(derive_seed(spec.seed, "shift_bhv", {static_cast<std::uint64_t>(m)}));
    Rng rn(derive_seed(spec.seed, "shift_nbhv", {static_cast<std::uint64_t>(m)}));
    WeightShiftRow row{m, 0, sampled_variance(spec.bhv, m, spec.sample_count, rb),
                       sampled_variance(spec.nbhv, m, spec.sample_count, rn)};
    row.w_star = optimal_weight({row.e_bhv, row.e_nbhv});
    rows.push_back(row);
  }
  return rows;
}

std::string weight_shift_csv(const std::vector<WeightShiftRow>& rows) {
  std::ostringstream out;
  out << "m,w_star,e_bhv,e_nbhv\n";
  for (const auto& r : rows) {
    out << r.m << ',' << io::format_double(r.w_star) << ',' << io::format_double(r.e_bhv) << ','
        << io::format_double(r.e_nbhv) << '\n';
  }
  return out.str();
}

std::vector<GenerativeSpec> reference_weight_specs(std::size_t sample_count, std::uint64_t seed) {
  std::vector<GenerativeSpec> specs = {
      {{{0, .6}, {1, .1}, {.5, .3}}, {{0, .65}, {1, .15}, {.5, .2}}},
      {{{0, .4}, {.5, .4}, {1, .2}}, {{0, .4}, {.5, .4}, {1, .2}}},
      {{{.1, .5}, {.5, .5}}, {{0, .7}, {1, .3}}},
      {{{0, .75}, {1, .15}, {.2, .1}}, {{0, .55}, {1, .05}, {.3, .4}}},
      {{{0, .5}, {.25, .2}, {.75, .1}, {1, .2}}, {{0, .45}, {1, .175}, {.4, .375}}},
  };
  for (std::size_t i = 0; i < specs.size(); ++i) {
    specs[i].sample_count = sample_count;
    specs[i].seed = derive_seed(seed, "reference_weight_spec", {i});
  }
  return specs;
}

GenerativeSpec reference_shift_spec(std::size_t sample_count, std::uint64_t seed) {
  GenerativeSpec spec{{{0.02, 0.5}, {0.05, 0.3}, {0.1, 0.2}},
                      {{0.4, 0.5}, {0.5, 0.3}, {0.6, 0.2}}};
  spec.sample_count = sample_count;
  spec.seed = derive_seed(seed, "reference_shift_spec");
  return spec;
}

}  // namespace ace::theory
