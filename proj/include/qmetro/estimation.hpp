#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qmetro/counting.hpp"

namespace qmetro {

enum class EstimatorKind { LinearFringe, MaximumLikelihood, Bayesian };

/// Monte Carlo experiment: nu = shots_per_trial photon-count samples per
/// trial, one phase estimate per trial.
struct ExperimentConfig {
    Complex alpha{0.0, 0.0};
    double r = 0.0;
    double phi_true = 0.0;
    int shots_per_trial = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    int dim = 0;  // per-mode truncation; 0 selects the tail-based default
    EstimatorKind estimator = EstimatorKind::MaximumLikelihood;

    // phi_d is identifiable only up to sign for real-coefficient inputs
    // (the count distribution is even in phi_d), so estimation runs over an
    // explicit window, (0, pi) by default.
    double window_lo = 1e-3;
    double window_hi = M_PI - 1e-3;
    int grid_points = 720;

    void validate() const;
};

struct EstimationRun {
    std::vector<double> estimates;
    double sample_variance = 0.0;
    double crb = 0.0;             // 1 / (nu F) at phi_true
    double variance_ratio = 0.0;  // sample_variance / crb
    double bias = 0.0;
    double fisher_used = 0.0;
    /// One-sigma Monte Carlo error of sample_variance, from 10 trial batches.
    double mc_sigma = 0.0;
    /// Bayesian runs: mean posterior variance across trials (NaN otherwise).
    double mean_posterior_variance = 0.0;
};

struct CountSample {
    int ns = 0;
    int nd = 0;
};

/// Deterministic RNG stream: mt19937_64 with an explicit 53-bit uniform
/// conversion, so sequences are identical across platforms for a seed.
struct RngStream {
    explicit RngStream(std::uint64_t seed) : engine(seed) {}
    double uniform() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }
    std::mt19937_64 engine;
};

/// i.i.d. draws by inverse CDF over the distribution's outcome table in its
/// stored (n_s, n_d) ascending order.
std::vector<CountSample> sample_counts(const CountDistribution& dist, int n,
                                       RngStream& rng);

/// Count-distribution family over phi_d for a fixed input state.
class CountModel {
  public:
    explicit CountModel(TwoModeState input);

    const TwoModeState& input() const { return input_; }
    const RotationPlan& plan() const { return plan_; }

    CountDistribution distribution(double phi) const;
    double mean_nd(double phi) const;

    /// Joint log-likelihood of the samples at phi (aggregated internally).
    double log_likelihood(std::span<const CountSample> samples, double phi) const;
    /// Log-likelihood using only the n_d marginal of each sample.
    double log_likelihood_nd_only(std::span<const CountSample> samples,
                                  double phi) const;

  private:
    TwoModeState input_;
    RotationPlan plan_;
};

struct Window {
    double lo = 0.0;
    double hi = 0.0;
    int grid_points = 720;
};

/// Coarse grid scan of the log-likelihood followed by golden-section
/// refinement to 1e-8 rad. Throws FlatLikelihood when the grid range of the
/// log-likelihood is below 1e-12.
double ml_estimate(std::span<const CountSample> samples, const CountModel& model,
                   const Window& window);
/// Same estimator restricted to the n_d marginal.
double ml_estimate_nd_only(std::span<const CountSample> samples,
                           const CountModel& model, const Window& window);

struct BayesResult {
    double mean = 0.0;
    double variance = 0.0;
};

/// Flat-prior posterior on the window grid, normalized in log space with
/// trapezoidal weights. Throws DegeneratePosterior if normalization
/// underflows.
BayesResult bayes_estimate(std::span<const CountSample> samples,
                           const CountModel& model, const Window& window);

/// Inversion of the mean-n_d fringe, calibrated from the exact model on a
/// fine grid rather than an ideal cosine.
class FringeCalibration {
  public:
    FringeCalibration(const CountModel& model, const Window& window,
                      int table_points = 2048);
    /// Throws OutOfFringeRange when mean_nd leaves the tabulated branch.
    double invert(double mean_nd) const;

  private:
    std::vector<double> phi_;
    std::vector<double> mean_;
    bool decreasing_ = false;
};

double linear_fringe_estimate(std::span<const CountSample> samples,
                              const FringeCalibration& calibration);

/// Full Monte Carlo run: builds the coherent ⊗ squeezed-vacuum input,
/// samples per-trial counts with substream seeds (trial t uses
/// substream_seed(seed, t), so results are independent of scheduling), and
/// applies the configured estimator.
EstimationRun run_experiment(const ExperimentConfig& config);

}  // namespace qmetro
