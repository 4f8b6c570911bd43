#include "qmetro/optimizer.hpp"

#include <cmath>
#include <future>
#include <random>

namespace qmetro {

namespace {

// Sparse actions of the objective pieces: p^2 couples n to n and n +- 2,
// N is diagonal. Everything here is O(dim) per product.
struct Workspace {
    int dim;
    double alpha_sq;
    Eigen::VectorXd p2_diag;   // n + 1/2
    Eigen::VectorXd p2_off;    // -(1/2) sqrt((n+1)(n+2)), coupling n <-> n+2
    Eigen::VectorXd p_off;     // sqrt(n+1)/sqrt(2) scale for <p>
    Eigen::VectorXd n_diag;

    explicit Workspace(int d, double asq) : dim(d), alpha_sq(asq) {
        p2_diag.resize(d);
        p2_off.resize(d);
        p_off.resize(d);
        n_diag.resize(d);
        for (int n = 0; n < d; ++n) {
            p2_diag[n] = n + 0.5;
            p2_off[n] = (n + 2 < d) ? -0.5 * std::sqrt((n + 1.0) * (n + 2.0)) : 0.0;
            p_off[n] = (n + 1 < d) ? std::sqrt((n + 1.0) / 2.0) : 0.0;
            n_diag[n] = n;
        }
    }

    Eigen::VectorXcd apply_p2(const Eigen::VectorXcd& c) const {
        Eigen::VectorXcd out(dim);
        for (int n = 0; n < dim; ++n) out[n] = p2_diag[n] * c[n];
        for (int n = 0; n + 2 < dim; ++n) {
            out[n] += p2_off[n] * c[n + 2];
            out[n + 2] += p2_off[n] * c[n];
        }
        return out;
    }

    Eigen::VectorXcd apply_p(const Eigen::VectorXcd& c) const {
        // p = i(a† - a)/sqrt(2)
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
        const Complex i(0.0, 1.0);
        for (int n = 0; n + 1 < dim; ++n) {
            out[n + 1] += i * p_off[n] * c[n];   // a† part
            out[n] -= i * p_off[n] * c[n + 1];   // a part
        }
        return out;
    }

    double mean_n(const Eigen::VectorXcd& c) const {
        double acc = 0.0;
        for (int n = 0; n < dim; ++n) acc += n_diag[n] * std::norm(c[n]);
        return acc;
    }

    double mean_p(const Eigen::VectorXcd& c) const {
        return c.dot(apply_p(c)).real();
    }

    double mean_p2(const Eigen::VectorXcd& c) const {
        return c.dot(apply_p2(c)).real();
    }

    // f = 2 alpha^2 (  <p^2> - <p>^2 ) + <N>
    double objective(const Eigen::VectorXcd& c) const {
        const double p = mean_p(c);
        return 2.0 * alpha_sq * (mean_p2(c) - p * p) + mean_n(c);
    }

    // Gradient of the objective with respect to c*, as a vector.
    Eigen::VectorXcd objective_gradient(const Eigen::VectorXcd& c) const {
        const double p = mean_p(c);
        Eigen::VectorXcd g = 2.0 * alpha_sq * (apply_p2(c) - 2.0 * p * apply_p(c));
        for (int n = 0; n < dim; ++n) g[n] += n_diag[n] * c[n];
        return g;
    }
};

double re_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return a.dot(b).real();
}

double top_band(const Eigen::VectorXcd& c) {
    const int d = static_cast<int>(c.size());
    double m = std::norm(c[d - 1]);
    if (d >= 2) m += std::norm(c[d - 2]);
    return m;
}

ModeState reference_squeezed(double nbar, int dim) {
    // Comparison reference only; tail acceptance is deliberately loose so it
    // exists at any dim the optimizer might be running at.
    TruncationPolicy pol{dim, 1.0};
    return make_squeezed_vacuum(std::asinh(std::sqrt(nbar)), pol);
}

OptimizationResult vacuum_result(const OptimizationProblem& prob) {
    // nbar = 0: the feasible set is the single state |0>, and the dual
    // variable of the photon-number constraint diverges there, so the
    // iterative routes return the exact answer directly.
    OptimizationResult res;
    res.chi_opt = make_number(0, TruncationPolicy{prob.dim, 1.0});
    res.fdd_achieved = prob.alpha_sq;
    res.fmax_analytic = fmax_bound(prob.alpha_sq, 0.0).f_max;
    res.fidelity_to_squeezed = 1.0;
    res.converged = true;
    res.dim_used = prob.dim;
    return res;
}

OptimizationResult finalize(const OptimizationProblem& prob, Eigen::VectorXcd c,
                            long iterations, bool converged, int dim_used) {
    fix_global_phase_largest(c);
    OptimizationResult res;
    res.chi_opt = ModeState{c};
    res.fdd_achieved = fdd_quadrature(prob.alpha_sq, res.chi_opt);
    res.fmax_analytic = fmax_bound(prob.alpha_sq, prob.nbar).f_max;
    res.fidelity_to_squeezed = fidelity(res.chi_opt, reference_squeezed(prob.nbar, dim_used));
    res.iterations = iterations;
    res.converged = converged;
    res.constraint_residual = expect_n(res.chi_opt) - prob.nbar;
    res.top_band_mass = top_band(c);
    res.dim_used = dim_used;
    return res;
}

// Rescale the non-vacuum component so that <N> = nbar exactly, keeping unit
// norm. Used for the initial point and the final polish.
bool restore_feasible(Eigen::VectorXcd& c, double nbar) {
    Eigen::VectorXcd rest = c;
    rest[0] = 0.0;
    const double rest_norm = rest.norm();
    if (rest_norm < 1e-14) return nbar == 0.0;
    rest /= rest_norm;
    double n_rest = 0.0;
    for (int n = 1; n < rest.size(); ++n) n_rest += n * std::norm(rest[n]);
    if (n_rest < nbar) return false;  // too little weight at high levels
    const double b = std::sqrt(nbar / n_rest);
    const double a = std::sqrt(1.0 - b * b);
    const Complex phase0 = std::abs(c[0]) > 1e-14 ? c[0] / std::abs(c[0]) : Complex(1.0);
    c = b * rest;
    c[0] = a * phase0;
    return true;
}

OptimizationResult gradient_single_dim(const OptimizationProblem& prob, int dim) {
    const Workspace ws(dim, prob.alpha_sq);
    std::mt19937_64 rng(prob.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Perturbed vacuum with small even-level noise; weight decays slowly
    // enough that the feasibility restore can always reach nbar.
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
    c[0] = 1.0;
    for (int k = 1; 2 * k < dim; ++k) {
        c[2 * k] = 0.05 * std::pow(0.85, k) * Complex(gauss(rng), gauss(rng));
    }
    c /= c.norm();
    if (!restore_feasible(c, prob.nbar)) {
        // Push weight upward and retry once.
        for (int n = 1; n < dim; ++n) c[n] += 0.01 * Complex(gauss(rng), gauss(rng));
        c /= c.norm();
        restore_feasible(c, prob.nbar);
    }

    double lambda = 0.0;
    double mu = 10.0;
    double step = 0.1;
    long total_iters = 0;
    bool converged = false;
    const double fmax = fmax_bound(prob.alpha_sq, prob.nbar).f_max;
    const double grad_tol = prob.tol * std::max(1.0, fmax);

    const auto lagrangian = [&](const Eigen::VectorXcd& v) {
        const double h = ws.mean_n(v) - prob.nbar;
        return ws.objective(v) - lambda * h - 0.5 * mu * h * h;
    };

    double h_prev = std::abs(ws.mean_n(c) - prob.nbar);
    for (int outer = 0; outer < prob.max_outer; ++outer) {
        step = std::max(step, 1e-3);
        for (int inner = 0; inner < prob.max_inner; ++inner) {
            ++total_iters;
            const double h = ws.mean_n(c) - prob.nbar;
            Eigen::VectorXcd g = ws.objective_gradient(c);
            const double shift = lambda + mu * h;
            for (int n = 0; n < dim; ++n) g[n] -= shift * ws.n_diag[n] * c[n];
            // Tangent of the unit sphere.
            g -= re_dot(c, g) * c;

            // Convergence test projects out the constraint direction too.
            Eigen::VectorXcd ng = ws.n_diag.cast<Complex>().cwiseProduct(c);
            ng -= re_dot(c, ng) * c;
            Eigen::VectorXcd g2 = g;
            const double nn = re_dot(ng, ng);
            if (nn > 1e-20) g2 -= (re_dot(ng, g) / nn) * ng;
            if (g2.norm() < grad_tol && std::abs(h) < 1e-8) {
                converged = true;
                break;
            }

            const double l0 = lagrangian(c);
            const double gnorm2 = g.squaredNorm();
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                Eigen::VectorXcd trial = c + step * g;
                trial /= trial.norm();
                if (lagrangian(trial) >= l0 + 1e-4 * step * gnorm2) {
                    c = std::move(trial);
                    step *= 1.25;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;  // step underflow: inner problem is done
        }
        const double h = ws.mean_n(c) - prob.nbar;
        if (converged) break;
        lambda += mu * h;
        if (std::abs(h) > 0.25 * h_prev) mu = std::min(mu * 4.0, 1e12);
        h_prev = std::max(std::abs(h), 1e-16);
    }
    // Exact polish: meet the constraint to machine precision before scoring.
    restore_feasible(c, prob.nbar);
    return finalize(prob, std::move(c), total_iters, converged, dim);
}

}  // namespace

void OptimizationProblem::validate() const {
    if (alpha_sq < 0.0) throw ValidationError("optimizer: alpha_sq must be >= 0");
    if (nbar < 0.0) throw ValidationError("optimizer: nbar must be >= 0");
    if (dim < 2) throw ValidationError("optimizer: dim must be >= 2");
    if (nbar + 8.0 * std::sqrt(nbar) + 8.0 > dim) {
        throw ValidationError("optimizer: nbar " + std::to_string(nbar) +
                              " infeasible inside truncation dim " + std::to_string(dim));
    }
}

OptimizationResult maximize_fdd_gradient(const OptimizationProblem& prob) {
    prob.validate();
    if (prob.nbar == 0.0) return vacuum_result(prob);
    int dim = prob.dim;
    OptimizationResult res;
    for (int attempt = 0; attempt < 4; ++attempt) {
        OptimizationProblem p = prob;
        p.dim = dim;
        res = gradient_single_dim(p, dim);
        if (res.top_band_mass <= 1e-8) return res;
        dim = static_cast<int>(std::ceil(dim * 1.5)) + 10;
    }
    res.converged = false;
    return res;
}

OptimizationResult maximize_fdd_eigensweep(const OptimizationProblem& prob) {
    prob.validate();
    if (prob.nbar == 0.0) return vacuum_result(prob);
    const int dim = prob.dim;
    const Eigen::MatrixXd p2 = momentum_squared_matrix(dim);
    Eigen::VectorXd ndiag(dim);
    for (int n = 0; n < dim; ++n) ndiag[n] = n;

    long solves = 0;
    const auto top_state = [&](double lambda) {
        Eigen::MatrixXd m = p2;
        m.diagonal() -= lambda * ndiag;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        ++solves;
        Eigen::VectorXd v = es.eigenvectors().col(dim - 1);
        return v;
    };
    const auto mean_n_of = [&](const Eigen::VectorXd& v) {
        double acc = 0.0;
        for (int n = 0; n < dim; ++n) acc += n * v[n] * v[n];
        return acc;
    };

    // Analytic guess: the untruncated top eigenvector of p^2 - lambda N is a
    // squeezed vacuum with e^{4r} = lambda/(lambda - 2); invert at nbar.
    const double e2r = 2.0 * prob.nbar + 1.0 + 2.0 * std::sqrt(prob.nbar * (prob.nbar + 1.0));
    const double e4r = e2r * e2r;
    const double lambda_guess = 2.0 * e4r / (e4r - 1.0);

    // <N>(lambda) decreases with lambda; bracket around the guess.
    double lo = std::max(2.0 + 1e-9, lambda_guess / 2.0);
    double hi = lambda_guess * 2.0;
    double n_lo = mean_n_of(top_state(lo));
    double n_hi = mean_n_of(top_state(hi));
    int expand = 0;
    while (n_lo < prob.nbar && expand < 60) {
        lo = 2.0 + (lo - 2.0) / 2.0;
        n_lo = mean_n_of(top_state(lo));
        ++expand;
    }
    while (n_hi > prob.nbar && expand < 120) {
        hi *= 2.0;
        n_hi = mean_n_of(top_state(hi));
        ++expand;
    }
    if (n_lo < prob.nbar || n_hi > prob.nbar) {
        throw SweepBracketFailure("eigensweep: no multiplier bracket reaches <N> = " +
                                  std::to_string(prob.nbar) + " inside dim " +
                                  std::to_string(dim));
    }

    Eigen::VectorXd v;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        v = top_state(mid);
        const double n_mid = mean_n_of(v);
        if (std::abs(n_mid - prob.nbar) < 1e-11 * std::max(1.0, prob.nbar) ||
            (hi - lo) < 1e-15 * mid) {
            break;
        }
        if (n_mid > prob.nbar) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    Eigen::VectorXcd c = v.cast<Complex>();
    OptimizationResult res = finalize(prob, std::move(c), solves, true, dim);
    // The Lagrangian route is only valid on zero-phase-mean states.
    const Moments m = moments(res.chi_opt);
    if (std::abs(m.mean_p) > 1e-8) {
        throw NumericalError("eigensweep: eigenvector has <p> = " +
                             std::to_string(m.mean_p) + ", expected 0");
    }
    if (res.top_band_mass > 1e-8) {
        throw TruncationTooSmall("eigensweep: solution occupies the top band (mass " +
                                 std::to_string(res.top_band_mass) + "); increase dim");
    }
    return res;
}

RestartSummary maximize_fdd_gradient_restarts(const OptimizationProblem& prob,
                                              int restarts, int threads) {
    if (restarts < 1) throw ValidationError("restarts must be >= 1");
    std::vector<OptimizationProblem> probs(restarts, prob);
    for (int r = 0; r < restarts; ++r) {
        probs[r].seed = prob.seed + static_cast<std::uint64_t>(r);
    }
    std::vector<OptimizationResult> results(restarts);
    if (threads > 1) {
        std::vector<std::future<OptimizationResult>> futures;
        futures.reserve(restarts);
        for (int r = 0; r < restarts; ++r) {
            futures.push_back(std::async(std::launch::async,
                                         [&probs, r] { return maximize_fdd_gradient(probs[r]); }));
        }
        for (int r = 0; r < restarts; ++r) results[r] = futures[r].get();
    } else {
        for (int r = 0; r < restarts; ++r) results[r] = maximize_fdd_gradient(probs[r]);
    }
    RestartSummary summary;
    summary.restarts = restarts;
    int best = 0;
    double lo = results[0].fdd_achieved, hi = results[0].fdd_achieved;
    for (int r = 1; r < restarts; ++r) {
        lo = std::min(lo, results[r].fdd_achieved);
        hi = std::max(hi, results[r].fdd_achieved);
        if (results[r].fdd_achieved > results[best].fdd_achieved) best = r;
    }
    summary.best = results[best];
    summary.all = std::move(results);
    summary.fdd_spread = hi - lo;
    return summary;
}

}  // namespace qmetro
