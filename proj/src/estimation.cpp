#include "qmetro/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "qmetro/io.hpp"

namespace qmetro {

namespace {

constexpr double kLogZero = -745.0;  // below exp underflow

double safe_log(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

// Aggregated samples grouped by n_s so a likelihood evaluation touches each
// occupied block once.
struct Aggregate {
    struct Block {
        int ns;
        std::vector<std::pair<int, int>> counts;  // (k = (ns+nd)/2, multiplicity)
    };
    std::vector<Block> blocks;
    std::map<int, int> nd_counts;  // marginal multiplicities
    int total = 0;
};

Aggregate aggregate(std::span<const CountSample> samples) {
    std::map<std::pair<int, int>, int> joint;
    Aggregate agg;
    for (const auto& s : samples) {
        ++joint[{s.ns, s.nd}];
        ++agg.nd_counts[s.nd];
        ++agg.total;
    }
    int current_ns = -1;
    for (const auto& [key, count] : joint) {
        if (key.first != current_ns) {
            agg.blocks.push_back({key.first, {}});
            current_ns = key.first;
        }
        agg.blocks.back().counts.push_back({(key.first + key.second) / 2, count});
    }
    return agg;
}

// Golden-section maximization of a unimodal bracket.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double xtol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

template <typename LogLik>
double grid_refine_ml(LogLik&& loglik, const Window& window) {
    const int points = std::max(2, window.grid_points);
    std::vector<double> values(points);
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (int i = 0; i < points; ++i) {
        const double phi = window.lo + (window.hi - window.lo) * i / (points - 1.0);
        values[i] = loglik(phi);
        if (values[i] > best) {
            best = values[i];
            best_idx = i;
        }
        worst = std::min(worst, values[i]);
    }
    if (best - worst < 1e-12) {
        throw FlatLikelihood("ml_estimate: log-likelihood range " +
                             std::to_string(best - worst) + " over the grid");
    }
    const double h = (window.hi - window.lo) / (points - 1.0);
    const double lo = std::max(window.lo, window.lo + h * (best_idx - 1));
    const double hi = std::min(window.hi, window.lo + h * (best_idx + 1));
    return golden_section_max(loglik, lo, hi, 1e-8);
}

double variance_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / (xs.size() - 1.0);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (shots_per_trial <= 0) throw ValidationError("shots_per_trial must be > 0");
    if (trials <= 0) throw ValidationError("trials must be > 0");
    if (dim < 0) throw ValidationError("dim must be >= 0");
    if (!(window_lo < window_hi)) throw ValidationError("estimation window is empty");
    if (phi_true <= window_lo || phi_true >= window_hi) {
        throw ValidationError("phi_true lies outside the estimation window");
    }
    if (grid_points < 2) throw ValidationError("grid_points must be >= 2");
}

std::vector<CountSample> sample_counts(const CountDistribution& dist, int n,
                                       RngStream& rng) {
    std::vector<double> cdf(dist.outcomes.size());
    double acc = 0.0;
    for (size_t i = 0; i < dist.outcomes.size(); ++i) {
        acc += dist.outcomes[i].p;
        cdf[i] = acc;
    }
    if (acc <= 0.0) throw ValidationError("sample_counts: distribution has no mass");
    std::vector<CountSample> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const size_t idx = std::min<size_t>(it - cdf.begin(), cdf.size() - 1);
        out.push_back({dist.outcomes[idx].ns, dist.outcomes[idx].nd});
    }
    return out;
}

CountModel::CountModel(TwoModeState input)
    : input_(std::move(input)), plan_(make_rotation_plan(input_)) {}

CountDistribution CountModel::distribution(double phi) const {
    return count_distribution(plan_, phi);
}

double CountModel::mean_nd(double phi) const {
    double acc = 0.0;
    for (size_t b = 0; b < plan_.blocks.size(); ++b) {
        const int n = plan_.blocks[b].n;
        const Eigen::VectorXcd amp = plan_.rotate(b, phi);
        for (int k = 0; k <= n; ++k) acc += (2 * k - n) * std::norm(amp[k]);
    }
    return acc;
}

double CountModel::log_likelihood(std::span<const CountSample> samples,
                                  double phi) const {
    const Aggregate agg = aggregate(samples);
    double ll = 0.0;
    size_t bi = 0;
    for (const auto& blk : agg.blocks) {
        while (bi < plan_.blocks.size() && plan_.blocks[bi].n < blk.ns) ++bi;
        if (bi >= plan_.blocks.size() || plan_.blocks[bi].n != blk.ns) {
            ll += kLogZero * blk.counts.size();  // outcome outside model support
            continue;
        }
        const Eigen::VectorXcd amp = plan_.rotate(bi, phi);
        for (const auto& [k, mult] : blk.counts) {
            ll += mult * safe_log(std::norm(amp[k]));
        }
    }
    return ll;
}

double CountModel::log_likelihood_nd_only(std::span<const CountSample> samples,
                                          double phi) const {
    std::map<int, int> nd_counts;
    for (const auto& s : samples) ++nd_counts[s.nd];
    std::map<int, double> marginal;
    for (size_t b = 0; b < plan_.blocks.size(); ++b) {
        const int n = plan_.blocks[b].n;
        const Eigen::VectorXcd amp = plan_.rotate(b, phi);
        for (int k = 0; k <= n; ++k) marginal[2 * k - n] += std::norm(amp[k]);
    }
    double ll = 0.0;
    for (const auto& [nd, mult] : nd_counts) {
        const auto it = marginal.find(nd);
        ll += mult * (it == marginal.end() ? kLogZero : safe_log(it->second));
    }
    return ll;
}

double ml_estimate(std::span<const CountSample> samples, const CountModel& model,
                   const Window& window) {
    if (samples.empty()) throw ValidationError("ml_estimate: no samples");
    return grid_refine_ml(
        [&](double phi) { return model.log_likelihood(samples, phi); }, window);
}

double ml_estimate_nd_only(std::span<const CountSample> samples,
                           const CountModel& model, const Window& window) {
    if (samples.empty()) throw ValidationError("ml_estimate: no samples");
    return grid_refine_ml(
        [&](double phi) { return model.log_likelihood_nd_only(samples, phi); }, window);
}

BayesResult bayes_estimate(std::span<const CountSample> samples,
                           const CountModel& model, const Window& window) {
    const int points = std::max(2, window.grid_points);
    std::vector<double> phi(points), logp(points);
    for (int i = 0; i < points; ++i) {
        phi[i] = window.lo + (window.hi - window.lo) * i / (points - 1.0);
        logp[i] = samples.empty() ? 0.0 : model.log_likelihood(samples, phi[i]);
    }
    const double peak = *std::max_element(logp.begin(), logp.end());
    // Trapezoidal weights on the uniform grid.
    double z = 0.0, mean = 0.0;
    const double h = (window.hi - window.lo) / (points - 1.0);
    std::vector<double> w(points, 1.0);
    w.front() = w.back() = 0.5;
    std::vector<double> post(points);
    for (int i = 0; i < points; ++i) {
        post[i] = std::exp(logp[i] - peak) * w[i] * h;
        z += post[i];
        mean += post[i] * phi[i];
    }
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DegeneratePosterior("bayes_estimate: posterior normalization underflowed");
    }
    mean /= z;
    double var = 0.0;
    for (int i = 0; i < points; ++i) var += post[i] * (phi[i] - mean) * (phi[i] - mean);
    var /= z;
    return {mean, var};
}

FringeCalibration::FringeCalibration(const CountModel& model, const Window& window,
                                     int table_points) {
    phi_.resize(table_points);
    mean_.resize(table_points);
    for (int i = 0; i < table_points; ++i) {
        phi_[i] = window.lo + (window.hi - window.lo) * i / (table_points - 1.0);
        mean_[i] = model.mean_nd(phi_[i]);
    }
    decreasing_ = mean_.front() > mean_.back();
    for (int i = 0; i + 1 < table_points; ++i) {
        const bool ok = decreasing_ ? mean_[i + 1] < mean_[i] : mean_[i + 1] > mean_[i];
        if (!ok) {
            throw OutOfFringeRange(
                "fringe calibration: mean n_d is not monotone over the window");
        }
    }
}

double FringeCalibration::invert(double mean_nd) const {
    const double lo = decreasing_ ? mean_.back() : mean_.front();
    const double hi = decreasing_ ? mean_.front() : mean_.back();
    if (mean_nd < lo || mean_nd > hi) {
        throw OutOfFringeRange("fringe inversion: sample mean " +
                               format_g17(mean_nd) + " outside branch [" +
                               format_g17(lo) + ", " + format_g17(hi) + "]");
    }
    // Binary search on the tabulated monotone branch, then linear interp.
    int a = 0, b = static_cast<int>(mean_.size()) - 1;
    while (b - a > 1) {
        const int mid = (a + b) / 2;
        const bool go_right = decreasing_ ? mean_[mid] > mean_nd : mean_[mid] < mean_nd;
        (go_right ? a : b) = mid;
    }
    const double span = mean_[b] - mean_[a];
    const double t = std::abs(span) > 1e-300 ? (mean_nd - mean_[a]) / span : 0.5;
    return phi_[a] + t * (phi_[b] - phi_[a]);
}

double linear_fringe_estimate(std::span<const CountSample> samples,
                              const FringeCalibration& calibration) {
    if (samples.empty()) throw ValidationError("linear_fringe_estimate: no samples");
    double mean = 0.0;
    for (const auto& s : samples) mean += s.nd;
    mean /= samples.size();
    return calibration.invert(mean);
}

EstimationRun run_experiment(const ExperimentConfig& config) {
    config.validate();
    const double nbar = std::sinh(config.r) * std::sinh(config.r);
    TruncationPolicy pol1 =
        config.dim > 0 ? TruncationPolicy{config.dim, 1e-10}
                       : TruncationPolicy::for_mean_photon(std::norm(config.alpha));
    TruncationPolicy pol2 = config.dim > 0 ? TruncationPolicy{config.dim, 1e-10}
                                           : TruncationPolicy::for_squeezed(config.r);
    const ModeState primary = make_coherent(config.alpha, pol1);
    const ModeState secondary = make_squeezed_vacuum(config.r, pol2);
    const CountModel model(tensor(primary, secondary));
    const CountDistribution dist = model.distribution(config.phi_true);
    const double fisher = classical_fisher(model.plan(), config.phi_true);
    const double nu = config.shots_per_trial;
    const Window window{config.window_lo, config.window_hi, config.grid_points};

    std::optional<FringeCalibration> fringe;
    if (config.estimator == EstimatorKind::LinearFringe) {
        fringe.emplace(model, window);
    }

    EstimationRun run;
    run.fisher_used = fisher;
    run.crb = 1.0 / (nu * fisher);
    run.estimates.reserve(config.trials);
    run.mean_posterior_variance = std::numeric_limits<double>::quiet_NaN();
    double posterior_var_acc = 0.0;
    for (int t = 0; t < config.trials; ++t) {
        RngStream rng(substream_seed(config.seed, static_cast<std::uint64_t>(t)));
        const std::vector<CountSample> samples =
            sample_counts(dist, config.shots_per_trial, rng);
        switch (config.estimator) {
            case EstimatorKind::MaximumLikelihood:
                run.estimates.push_back(ml_estimate(samples, model, window));
                break;
            case EstimatorKind::Bayesian: {
                const BayesResult b = bayes_estimate(samples, model, window);
                run.estimates.push_back(b.mean);
                posterior_var_acc += b.variance;
                break;
            }
            case EstimatorKind::LinearFringe:
                run.estimates.push_back(linear_fringe_estimate(samples, *fringe));
                break;
        }
    }
    double mean = 0.0;
    for (double e : run.estimates) mean += e;
    mean /= run.estimates.size();
    run.bias = mean - config.phi_true;
    run.sample_variance = variance_of(run.estimates, mean);
    run.variance_ratio = run.sample_variance / run.crb;
    if (config.estimator == EstimatorKind::Bayesian) {
        run.mean_posterior_variance = posterior_var_acc / config.trials;
    }

    // Monte Carlo error of the variance estimate from 10 batches.
    const int batches = 10;
    if (config.trials >= batches * 2) {
        std::vector<double> batch_vars;
        const int per = config.trials / batches;
        for (int b = 0; b < batches; ++b) {
            std::vector<double> chunk(run.estimates.begin() + b * per,
                                      run.estimates.begin() + (b + 1) * per);
            double m = 0.0;
            for (double e : chunk) m += e;
            m /= chunk.size();
            batch_vars.push_back(variance_of(chunk, m));
        }
        double bm = 0.0;
        for (double v : batch_vars) bm += v;
        bm /= batches;
        run.mc_sigma = std::sqrt(variance_of(batch_vars, bm) / batches);
    }
    return run;
}

}  // namespace qmetro
