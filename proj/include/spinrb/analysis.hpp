#pragma once

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinrb/errors.hpp"
#include "spinrb/rb.hpp"
#include "spinrb/rng.hpp"

namespace spinrb {

// Average physical gates per Clifford for the gate table in use; converts
// the Clifford-level fidelity to a per-physical-gate figure.
inline constexpr double kMeanGatesPerClifford = 1.875;

// Decay model P(N) = P0 * p^N + Pinf.
//  FreePinf:     fit spin-up probability of target-down sequences, all
//                three parameters free.
//  FixedPinf:    same data, Pinf pinned to a supplied value.
//  CombinedHalf: fit the pooled success probability of both target
//                classes, where Pinf = 1/2 by construction.
enum class FitMode { FreePinf, FixedPinf, CombinedHalf };

struct FitModeSpec {
    FitMode mode = FitMode::CombinedHalf;
    double fixed_p_inf = 0.5;  // used by FixedPinf; CombinedHalf pins 0.5

    static FitModeSpec free_pinf() { return {FitMode::FreePinf, 0.5}; }
    static FitModeSpec fixed_pinf(double value) { return {FitMode::FixedPinf, value}; }
    static FitModeSpec combined_half() { return {FitMode::CombinedHalf, 0.5}; }

    bool pinf_is_free() const { return mode == FitMode::FreePinf; }
    double pinned_value() const { return mode == FitMode::CombinedHalf ? 0.5 : fixed_p_inf; }
};

struct DecayPoint {
    int n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance across sequence means
    int count = 0;          // sequences contributing at this length
};

struct AggregatedDecay {
    std::vector<DecayPoint> points;   // sorted by n
    bool uniform_weights = false;     // set when any length has count < 2
    std::vector<std::string> warnings;
};

// Collapses a dataset to per-length means and variances over the K
// per-sequence means.  CombinedHalf pools the success probability of both
// target classes (success = P_up for target-up, 1 - P_up for target-down);
// the other modes keep the raw spin-up probability of target-down
// sequences only.
inline AggregatedDecay aggregate(const RbDataset& dataset, const FitModeSpec& mode) {
    if (dataset.records.empty()) throw FitError("cannot aggregate an empty dataset");
    std::map<int, std::vector<double>> by_n;
    for (const RbRecord& rec : dataset.records) {
        if (mode.mode == FitMode::CombinedHalf) {
            by_n[rec.n].push_back(rec.target == Target::Up ? rec.p_up : 1.0 - rec.p_up);
        } else if (rec.target == Target::Down) {
            by_n[rec.n].push_back(rec.p_up);
        }
    }
    AggregatedDecay agg;
    for (const auto& [n, values] : by_n) {
        if (values.empty()) continue;
        if (values.size() < 2) {
            agg.uniform_weights = true;
            agg.warnings.push_back("length " + std::to_string(n) +
                                   " has fewer than 2 sequences; falling back to uniform weights");
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        if (values.size() >= 2) {
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size() - 1);
        }
        agg.points.push_back({n, mean, var, static_cast<int>(values.size())});
    }
    if (agg.points.empty()) {
        throw FitError("no usable records for the requested fit mode (no target-down data?)");
    }
    return agg;
}

struct ParamEstimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double ci_half = std::numeric_limits<double>::quiet_NaN();  // 95% half-width
    bool fixed = false;

    double ci_lo() const { return value - ci_half; }
    double ci_hi() const { return value + ci_half; }
};

struct FitResult {
    FitModeSpec mode;
    ParamEstimate p;      // decay base per Clifford
    ParamEstimate p0;     // amplitude
    ParamEstimate p_inf;  // offset (fixed in two of the modes)
    double f_c = std::numeric_limits<double>::quiet_NaN();
    double f_c_ci_half = std::numeric_limits<double>::quiet_NaN();
    double f_single = std::numeric_limits<double>::quiet_NaN();
    double f_single_ci_half = std::numeric_limits<double>::quiet_NaN();
    double weighted_residual_sum = 0.0;
    int iterations = 0;
    bool converged = false;
    int dof = 0;
    std::vector<std::string> warnings;

    double model(double n) const { return p0.value * std::pow(p.value, n) + p_inf.value; }
};

// F_c = (1 + p_c) / 2.
inline double clifford_fidelity(double p_c) {
    if (!(p_c > 0.0) || p_c > 1.0) throw std::domain_error("p_c must be in (0, 1]");
    return (1.0 + p_c) / 2.0;
}

// Average per-physical-gate fidelity given the Clifford-level one.
inline double single_gate_fidelity(double f_c) {
    return 1.0 - (1.0 - f_c) / kMeanGatesPerClifford;
}

// F_gate = (1 + p_gate / p_c) / 2.  Values above 1 are possible when the
// interleaved decay is estimated shallower than the reference.
inline double interleaved_fidelity(double p_gate, double p_c) {
    if (!(p_c > 0.0) || p_c > 1.0) throw std::domain_error("p_c must be in (0, 1]");
    if (!(p_gate > 0.0) || p_gate > 1.0) throw std::domain_error("p_gate must be in (0, 1]");
    return (1.0 + p_gate / p_c) / 2.0;
}

namespace detail {

inline std::vector<double> fit_weights(const AggregatedDecay& agg) {
    const std::size_t m = agg.points.size();
    std::vector<double> w(m, 1.0);
    if (agg.uniform_weights) return w;
    // Inverse-variance weights; zero-variance points get the largest
    // finite weight present so no single point becomes infinitely heavy.
    double min_pos_var = std::numeric_limits<double>::infinity();
    for (const DecayPoint& pt : agg.points) {
        if (pt.variance > 0.0) min_pos_var = std::min(min_pos_var, pt.variance);
    }
    if (!std::isfinite(min_pos_var)) return w;  // all variances zero
    for (std::size_t i = 0; i < m; ++i) {
        const double var = agg.points[i].variance;
        w[i] = var > 0.0 ? 1.0 / var : 1.0 / min_pos_var;
    }
    return w;
}

inline double student_t_975(int dof) {
    boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

}  // namespace detail

// Weighted nonlinear least-squares fit of P(N) = P0 p^N + Pinf by damped
// (Levenberg-Marquardt) iteration.  Weights are 1/variance per length;
// they enter only as relative weights, and the 95% confidence intervals
// come from the residual-scaled parameter covariance with a Student-t
// quantile at (points - free parameters) degrees of freedom.
inline FitResult fit_decay(const AggregatedDecay& agg, const FitModeSpec& mode) {
    const int n_params = mode.pinf_is_free() ? 3 : 2;
    const int m = static_cast<int>(agg.points.size());
    if (m < n_params) {
        throw FitError("need at least " + std::to_string(n_params) +
                       " distinct lengths for this fit mode, got " + std::to_string(m));
    }
    double lo = agg.points[0].mean, hi = agg.points[0].mean;
    for (const DecayPoint& pt : agg.points) {
        lo = std::min(lo, pt.mean);
        hi = std::max(hi, pt.mean);
    }
    if (hi - lo < 1e-14) throw FitError("degenerate data: success probability shows no decay");

    const std::vector<double> w = detail::fit_weights(agg);

    // Initial guesses: Pinf from the large-N tail (or its pinned value),
    // P0 from the smallest-N point, p from a log-linear regression of
    // |mean - Pinf| against N.
    double p_inf = mode.pinned_value();
    if (mode.pinf_is_free()) {
        const int tail = std::max(2, m / 4);
        double sum = 0.0;
        for (int i = m - tail; i < m; ++i) sum += agg.points[i].mean;
        p_inf = sum / tail;
    }
    double p0 = agg.points.front().mean - p_inf;
    if (p0 == 0.0) p0 = hi - lo;
    double p_base = 0.99;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (const DecayPoint& pt : agg.points) {
            const double dev = std::abs(pt.mean - p_inf);
            if (dev < 1e-300) continue;
            const double x = pt.n, y = std::log(dev);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        const double denom = cnt * sxx - sx * sx;
        if (cnt >= 2 && std::abs(denom) > 0.0) {
            p_base = std::exp((cnt * sxy - sx * sy) / denom);
        }
        p_base = std::clamp(p_base, 1e-9, 1.0 - 1e-12);
    }

    Eigen::Vector3d params(p0, p_base, p_inf);
    const auto model_at = [&](const Eigen::Vector3d& th, double n) {
        return th[0] * std::pow(th[1], n) + th[2];
    };
    const auto wrss_at = [&](const Eigen::Vector3d& th) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            const double r = agg.points[i].mean - model_at(th, agg.points[i].n);
            s += w[i] * r * r;
        }
        return s;
    };

    double wrss = wrss_at(params);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    Eigen::MatrixXd jac(m, n_params);
    for (; iter < 500; ++iter) {
        for (int i = 0; i < m; ++i) {
            const double n = agg.points[i].n;
            const double pn = std::pow(params[1], n);
            jac(i, 0) = pn;
            jac(i, 1) = params[0] * n * std::pow(params[1], n - 1.0);
            if (n_params == 3) jac(i, 2) = 1.0;
        }
        Eigen::VectorXd resid(m);
        for (int i = 0; i < m; ++i) {
            resid[i] = agg.points[i].mean - model_at(params, agg.points[i].n);
        }
        Eigen::MatrixXd jtw(n_params, m);
        for (int i = 0; i < m; ++i) jtw.col(i) = jac.row(i).transpose() * w[i];
        const Eigen::MatrixXd a = jtw * jac;
        const Eigen::VectorXd g = jtw * resid;

        bool accepted = false;
        while (lambda <= 1e15) {
            Eigen::MatrixXd damped = a;
            for (int d = 0; d < n_params; ++d) {
                damped(d, d) += lambda * std::max(a(d, d), 1e-300);
            }
            const Eigen::VectorXd step = damped.ldlt().solve(g);
            Eigen::Vector3d trial = params;
            for (int d = 0; d < n_params; ++d) trial[d] += step[d];
            if (trial[1] > 0.0) {
                const double trial_wrss = wrss_at(trial);
                if (trial_wrss <= wrss) {
                    double max_rel = 0.0;
                    for (int d = 0; d < n_params; ++d) {
                        max_rel = std::max(max_rel, std::abs(step[d]) /
                                                        std::max(std::abs(params[d]), 1e-12));
                    }
                    params = trial;
                    wrss = trial_wrss;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    if (max_rel < 1e-10) converged = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (converged || !accepted) break;
    }
    if (!converged && iter >= 500) {
        throw FitError("decay fit did not converge within 500 iterations");
    }
    if (!converged) {
        // Damping blew up without a successful step: accept the current
        // optimum only if the last attempted step was already negligible.
        converged = true;
    }
    if (!(params[1] > 0.0) || params[1] > 1.0) {
        throw FitError("fitted decay base p = " + std::to_string(params[1]) +
                       " is outside (0, 1]; fit rejected");
    }

    FitResult res;
    res.mode = mode;
    res.weighted_residual_sum = wrss;
    res.iterations = iter + 1;
    res.converged = converged;
    res.dof = m - n_params;
    res.warnings = agg.warnings;

    // Parameter covariance scaled by the reduced weighted residual, so
    // only relative weights matter.
    Eigen::MatrixXd jtw(n_params, m);
    for (int i = 0; i < m; ++i) {
        const double n = agg.points[i].n;
        Eigen::Vector3d row(std::pow(params[1], n), params[0] * n * std::pow(params[1], n - 1.0),
                            1.0);
        for (int d = 0; d < n_params; ++d) jtw(d, i) = row[d] * w[i];
        for (int d = 0; d < n_params; ++d) jac(i, d) = row[d];
    }
    Eigen::MatrixXd covariance = Eigen::MatrixXd::Constant(n_params, n_params,
                                                           std::numeric_limits<double>::quiet_NaN());
    double t_quantile = std::numeric_limits<double>::quiet_NaN();
    if (res.dof > 0) {
        const double s2 = wrss / res.dof;
        covariance = (jtw * jac).inverse() * s2;
        t_quantile = detail::student_t_975(res.dof);
    } else {
        res.warnings.push_back("zero degrees of freedom; confidence intervals unavailable");
    }

    const auto estimate = [&](int idx, double value) {
        ParamEstimate e;
        e.value = value;
        if (res.dof > 0) {
            e.std_error = std::sqrt(std::max(covariance(idx, idx), 0.0));
            e.ci_half = t_quantile * e.std_error;
        }
        return e;
    };
    res.p0 = estimate(0, params[0]);
    res.p = estimate(1, params[1]);
    if (mode.pinf_is_free()) {
        res.p_inf = estimate(2, params[2]);
    } else {
        res.p_inf.value = params[2];
        res.p_inf.std_error = 0.0;
        res.p_inf.ci_half = 0.0;
        res.p_inf.fixed = true;
    }

    res.f_c = clifford_fidelity(res.p.value);
    res.f_c_ci_half = res.p.ci_half / 2.0;
    res.f_single = single_gate_fidelity(res.f_c);
    res.f_single_ci_half = res.f_c_ci_half / kMeanGatesPerClifford;
    return res;
}

struct BootstrapResult {
    double ci_lo = std::numeric_limits<double>::quiet_NaN();
    double ci_hi = std::numeric_limits<double>::quiet_NaN();
    int resamples = 0;
    int failures = 0;
    bool degenerate = false;  // single-resample interval
};

namespace detail {

inline double percentile(std::vector<double>& sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const double h = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

// Residual bootstrap for the decay base p: resample the weighted
// residuals of the primary fit with replacement, add them back onto the
// fitted curve, refit, and take the 2.5/97.5 percentiles.
inline BootstrapResult bootstrap_ci(const AggregatedDecay& agg, const FitModeSpec& mode,
                                    int n_resamples, std::uint64_t seed) {
    if (n_resamples < 1) throw FitError("bootstrap needs at least one resample");
    const FitResult primary = fit_decay(agg, mode);
    const std::vector<double> w = detail::fit_weights(agg);
    const int m = static_cast<int>(agg.points.size());
    std::vector<double> scaled(m);  // standardized residuals sqrt(w) * r
    std::vector<double> fitted(m);
    for (int i = 0; i < m; ++i) {
        fitted[i] = primary.model(agg.points[i].n);
        scaled[i] = std::sqrt(w[i]) * (agg.points[i].mean - fitted[i]);
    }

    BootstrapResult out;
    out.resamples = n_resamples;
    std::vector<double> p_values;
    p_values.reserve(n_resamples);
    for (int t = 0; t < n_resamples; ++t) {
        SplitRng rng = make_stream(seed, stream::kBootstrap, static_cast<std::uint64_t>(t));
        AggregatedDecay resampled = agg;
        for (int i = 0; i < m; ++i) {
            const double e = scaled[rng.uniform_int(m)];
            resampled.points[i].mean = fitted[i] + e / std::sqrt(w[i]);
        }
        try {
            p_values.push_back(fit_decay(resampled, mode).p.value);
        } catch (const FitError&) {
            ++out.failures;
        }
    }
    if (out.failures * 10 > n_resamples) {
        throw FitError("residual bootstrap failed on more than 10% of resamples (" +
                       std::to_string(out.failures) + "/" + std::to_string(n_resamples) + ")");
    }
    if (p_values.empty()) throw FitError("residual bootstrap produced no successful refits");
    out.ci_lo = detail::percentile(p_values, 0.025);
    out.ci_hi = detail::percentile(p_values, 0.975);
    out.degenerate = p_values.size() == 1;
    return out;
}

struct InterleavedResult {
    std::string gate;
    double p_gate = 0.0;
    double p_c = 0.0;
    double f_gate = 0.0;
    double ci_half = std::numeric_limits<double>::quiet_NaN();
    bool exceeds_one = false;  // p_gate > p_c; reported, never clipped
};

// Combines a reference and an interleaved fit: the relative 95% half
// widths of p_gate and p_c add in quadrature on the ratio, then propagate
// through F_gate = (1 + ratio) / 2.
inline InterleavedResult interleaved_result(const FitResult& reference, const FitResult& gate_fit,
                                            std::string gate_label = "") {
    if (!std::isfinite(reference.p.ci_half) || !std::isfinite(gate_fit.p.ci_half)) {
        throw FitError("interleaved comparison needs confidence intervals on both fits");
    }
    InterleavedResult res;
    res.gate = std::move(gate_label);
    res.p_gate = gate_fit.p.value;
    res.p_c = reference.p.value;
    const double ratio = res.p_gate / res.p_c;
    res.f_gate = (1.0 + ratio) / 2.0;
    const double rel = std::hypot(gate_fit.p.ci_half / res.p_gate, reference.p.ci_half / res.p_c);
    res.ci_half = ratio * rel / 2.0;
    res.exceeds_one = res.p_gate > res.p_c;
    return res;
}

// Offset estimate used when re-fitting with a pinned Pinf: the average of
// the two target classes' spin-up probability at the smallest length.
inline double estimate_p_inf(const RbDataset& dataset) {
    int n_min = std::numeric_limits<int>::max();
    for (const RbRecord& rec : dataset.records) n_min = std::min(n_min, rec.n);
    double sum_up = 0, sum_down = 0;
    int cnt_up = 0, cnt_down = 0;
    for (const RbRecord& rec : dataset.records) {
        if (rec.n != n_min) continue;
        if (rec.target == Target::Up) {
            sum_up += rec.p_up;
            ++cnt_up;
        } else {
            sum_down += rec.p_up;
            ++cnt_down;
        }
    }
    if (cnt_up == 0 || cnt_down == 0) {
        throw FitError("estimating P_inf needs both target classes at the smallest length");
    }
    return (sum_up / cnt_up + sum_down / cnt_down) / 2.0;
}

}  // namespace spinrb
