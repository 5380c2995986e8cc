// Closed forms for the aggregated-label variance argument, plus Monte Carlo
// checks of them.
//
// Notation: p is P(Y=1 | X=x) for one feature class; m sessions aggregated
// with the "at least one engagement" cut-off give p~ = 1 - (1-p)^m. The
// unexplained variance of a binary label is p(1-p), and a blend
// w*f_bhv + (1-w)*f_nbhv with uncorrelated residues has expected squared error
// w^2 E[e_bhv] + (1-w)^2 E[e_nbhv], minimised at w* = E[e_nbhv] / (E[e_bhv] + E[e_nbhv]).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ace::theory {

struct VariancePair {
  double e_bhv = 0;
  double e_nbhv = 0;
};

struct PointMass {
  double p = 0;
  double mass = 0;
};

/// Discrete distribution of p(x) induced by one feature class.
using PDistribution = std::vector<PointMass>;

struct GenerativeSpec {
  PDistribution bhv;
  PDistribution nbhv;
  int m = 1;
  std::size_t sample_count = 1'000'000;
  std::uint64_t seed = 1;
};

double aggregated_positive_prob(double p, int m);
double unexplained_variance(double p);
double aggregated_unexplained_variance(double p, int m);
/// argmax over p of aggregated_unexplained_variance(p, m): 1 - 2^(-1/m).
double peak_probability(int m);
double expected_mse(double w, const VariancePair& pair);
double optimal_weight(const VariancePair& pair);
int extreme_cutoff_label(std::span<const int> labels);

struct CurveRow {
  int m = 1;
  double p = 0;
  double epsilon_tilde = 0;
};

/// Rows for p = 0, step, 2*step, ..., 1 (the last point clamped to 1).
std::vector<CurveRow> figure1_table(std::span<const int> m_values, double step);
std::string figure1_csv(const std::vector<CurveRow>& rows);

void validate(const PDistribution& dist, const char* name);
double mean_p(const PDistribution& dist);
/// E over the distribution of aggregated_unexplained_variance(p, m).
double expected_unexplained_variance(const PDistribution& dist, int m);

struct MonteCarloResult {
  double w_hat = 0;
  double w_star = 0;
  double e_bhv_hat = 0;
  double e_nbhv_hat = 0;
  double residue_correlation = 0;
};

/// Samples (X_bhv, X_nbhv, label) from a joint law whose single-feature
/// conditionals match the spec, estimates f_bhv / f_nbhv as per-value sample
/// means, and compares the grid minimiser (step 1e-3) of the sample MSE of
/// f_w with the closed-form weight on the estimated variances. Throws when
/// the sample residue correlation exceeds 0.02.
///
/// Joint law: a latent U ~ U[0,1) sets Y = [U < mu]. Each feature partitions
/// [0,1) into one cell per p-value (length p*mass inside [0,mu), the rest
/// inside [mu,1)). Behavioral cells with 0<p<1 are packed at the start of each
/// half and non-behavioral ones at the end, so wherever one feature is
/// uncertain the other is decisive and (Y-f_bhv)(Y-f_nbhv) = 0 pointwise.
/// For m > 1 the m labels are redrawn within the cell intersection and
/// combined with the cut-off rule.
MonteCarloResult monte_carlo_weight(const GenerativeSpec& spec);

/// True when the layout above gives exactly uncorrelated residues: both
/// distributions share the mean and the uncertain mass fits in each half.
bool admits_uncorrelated_residues(const GenerativeSpec& spec);

struct WeightShiftRow {
  int m = 1;
  double w_star = 0;
  double e_bhv = 0;
  double e_nbhv = 0;
};

/// w* per m after mapping every p through the cut-off aggregation.
/// Preconditions (checked): behavioral mean p <= 0.2 with positive
/// unexplained variance; non-behavioral mass inside [0.3, 0.7] >= 0.8.
std::vector<WeightShiftRow> ace_weight_shift(const GenerativeSpec& spec,
                                             std::span<const int> m_values);

/// Independent estimate of the same table: draws p from each distribution,
/// aggregates m explicit Bernoulli(p) draws by OR, and measures the label
/// variance left around the per-value sample mean.
std::vector<WeightShiftRow> monte_carlo_weight_shift(const GenerativeSpec& spec,
                                                     std::span<const int> m_values);

std::string weight_shift_csv(const std::vector<WeightShiftRow>& rows);

/// Five joint specs admitting uncorrelated residues, spanning w* in
/// {0, 0.4, 0.5, 0.615, 0.84}; used by the theory command and its tests.
std::vector<GenerativeSpec> reference_weight_specs(std::size_t sample_count, std::uint64_t seed);

/// Left-skewed behavioral / mid-concentrated non-behavioral spec.
GenerativeSpec reference_shift_spec(std::size_t sample_count, std::uint64_t seed);

}  // namespace ace::theory
