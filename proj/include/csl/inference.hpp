#pragma once

// Fringe fitting, contrast-decay regression and the (r_C, lambda) exclusion
// curve that combines the interferometric bound with the wave-packet overlap
// bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "csl/errors.hpp"
#include "csl/phase.hpp"
#include "csl/rng.hpp"
#include "csl/types.hpp"
#include "csl/wavepacket.hpp"

namespace csl::inference {

// ---------------------------------------------------------------------------
// Fringe fit: P(alpha) = P_mean + C/2 cos((alpha0 - alpha) T^2)

struct FringePoint {
    double alpha = 0.0;       // rad/s^2
    double population = 0.0;  // probability
    std::optional<double> weight;
};

struct FringeScan {
    double t_sep = 0.0;
    std::vector<FringePoint> points;
};

struct FringeFit {
    double p_mean = 0.0;
    double contrast = 0.0;
    double alpha0 = 0.0;
    double sigma_p_mean = 0.0;
    double sigma_c = 0.0;
    double sigma_alpha0 = 0.0;
    double residual_rms = 0.0;
    double t_sep = 0.0;
    int iterations = 0;
    std::size_t n_points = 0;
};

struct FringeFitOptions {
    int grid_points = 64;
    int max_iterations = 200;
    double gradient_tol = 1e-10;  // max cosine between residuals and Jacobian columns
};

inline double fringe_period(double t_sep) { return 2.0 * std::numbers::pi / (t_sep * t_sep); }

inline void validate_scan(const FringeScan& scan) {
    if (!(scan.t_sep > 0.0)) throw DataError("fringe scan: t_sep must be > 0");
    if (scan.points.size() < 6) {
        throw DegenerateScanError("fringe scan: need at least 6 points, got " +
                                  std::to_string(scan.points.size()));
    }
    double lo = scan.points.front().alpha;
    double hi = lo;
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        const auto& p = scan.points[i];
        if (!std::isfinite(p.alpha)) throw DataError("fringe scan: non-finite alpha at point " + std::to_string(i));
        if (!(p.population >= 0.0 && p.population <= 1.0))
            throw DataError("fringe scan: population outside [0, 1] at point " + std::to_string(i));
        if (p.weight && !(*p.weight > 0.0)) throw DataError("fringe scan: weights must be > 0");
        lo = std::min(lo, p.alpha);
        hi = std::max(hi, p.alpha);
    }
    const double period = fringe_period(scan.t_sep);
    if (hi - lo < period * (1.0 - 1e-9)) {
        std::ostringstream msg;
        msg << "fringe scan: alpha range " << hi - lo << " rad/s^2 spans less than one fringe period ("
            << period << ")";
        throw DegenerateScanError(msg.str());
    }
}

namespace detail {

struct FringeProblem {
    Eigen::VectorXd x;   // (alpha_i - alpha_ref) T^2
    Eigen::VectorXd y;   // populations
    Eigen::VectorXd sw;  // sqrt(weight)
    double alpha_ref = 0.0;
    double t2 = 0.0;

    // Weighted residuals sqrt(w) (y - model) and their Jacobian w.r.t. (p_mean, C, phase).
    void evaluate(const Eigen::Vector3d& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
        const auto n = x.size();
        r.resize(n);
        if (jac) jac->resize(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double arg = p[2] - x[i];
            const double c = std::cos(arg);
            r[i] = sw[i] * (y[i] - p[0] - 0.5 * p[1] * c);
            if (jac) {
                (*jac)(i, 0) = -sw[i];
                (*jac)(i, 1) = -sw[i] * 0.5 * c;
                (*jac)(i, 2) = sw[i] * 0.5 * p[1] * std::sin(arg);
            }
        }
    }
};

inline double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi + std::numbers::pi, two_pi);
    if (phi < 0.0) phi += two_pi;
    return phi - std::numbers::pi;
}

}  // namespace detail

/// Least-squares fit of one chirp scan.
///
/// alpha0 is only defined modulo 2 pi / T^2; it is reported in the period
/// centred on the middle of the scanned range. A negative amplitude is folded
/// to C > 0 by shifting alpha0 half a period.
inline FringeFit fit_fringe(const FringeScan& scan, const FringeFitOptions& opts = {}) {
    validate_scan(scan);
    const auto n = static_cast<Eigen::Index>(scan.points.size());
    detail::FringeProblem prob;
    prob.t2 = scan.t_sep * scan.t_sep;
    double lo = scan.points.front().alpha;
    double hi = lo;
    for (const auto& p : scan.points) {
        lo = std::min(lo, p.alpha);
        hi = std::max(hi, p.alpha);
    }
    prob.alpha_ref = 0.5 * (lo + hi);
    prob.x.resize(n);
    prob.y.resize(n);
    prob.sw.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = scan.points[static_cast<std::size_t>(i)];
        prob.x[i] = (p.alpha - prob.alpha_ref) * prob.t2;
        prob.y[i] = p.population;
        prob.sw[i] = std::sqrt(p.weight.value_or(1.0));
    }

    {
        Eigen::MatrixXd design(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            design(i, 0) = prob.sw[i];
            design(i, 1) = prob.sw[i] * std::cos(prob.x[i]);
            design(i, 2) = prob.sw[i] * std::sin(prob.x[i]);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < 3) throw DegenerateScanError("fringe scan: design matrix is rank deficient");
    }

    // Coarse scan of the phase over one period; P_mean and C are linear given the phase.
    Eigen::Vector3d best(0.0, 0.0, 0.0);
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j = 0; j < opts.grid_points; ++j) {
        const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * j / opts.grid_points;
        Eigen::MatrixXd a(n, 2);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i, 0) = prob.sw[i];
            a(i, 1) = prob.sw[i] * 0.5 * std::cos(phi - prob.x[i]);
            b[i] = prob.sw[i] * prob.y[i];
        }
        const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
        const double cost = (a * coef - b).squaredNorm();
        if (std::isfinite(cost) && cost < best_cost) {
            best_cost = cost;
            best = {coef[0], coef[1], phi};
        }
    }

    // Levenberg-Marquardt refinement. Convergence is judged by the largest
    // cosine between the residual vector and a Jacobian column, which is
    // scale free and sits at rounding level at an exact optimum.
    auto max_cosine = [](const Eigen::MatrixXd& j, const Eigen::VectorXd& res) {
        const double rn = res.norm();
        if (rn == 0.0) return 0.0;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < j.cols(); ++k) {
            const double cn = j.col(k).norm();
            if (cn > 0.0) worst = std::max(worst, std::abs(j.col(k).dot(res)) / (cn * rn));
        }
        return worst;
    };
    Eigen::Vector3d p = best;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    prob.evaluate(p, r, &jac);
    double cost = r.squaredNorm();
    double mu = 1e-3;
    int iter = 0;
    // residuals this small are rounding noise and carry no direction
    const double floor = 1e-12 * prob.sw.cwiseProduct(prob.y).norm();
    auto converged = [&] { return r.norm() <= floor || max_cosine(jac, r) <= opts.gradient_tol; };
    while (!converged()) {
        if (iter >= opts.max_iterations) {
            throw ConvergenceError("fit_fringe: no convergence after " + std::to_string(iter) + " iterations");
        }
        ++iter;
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d grad = jac.transpose() * r;
        bool improved = false;
        while (mu < 1e20) {
            Eigen::Matrix3d lhs = jtj;
            for (int k = 0; k < 3; ++k) lhs(k, k) += mu * std::max(jtj(k, k), 1e-300);
            const Eigen::Vector3d step = lhs.ldlt().solve(-grad);
            const Eigen::Vector3d trial = p + step;
            Eigen::VectorXd r_trial;
            prob.evaluate(trial, r_trial, nullptr);
            const double c_trial = r_trial.squaredNorm();
            if (std::isfinite(c_trial) && c_trial <= cost) {
                improved = c_trial < cost || step.norm() > 1e-15 * (1.0 + p.norm());
                p = trial;
                cost = c_trial;
                mu = std::max(mu * 0.1, 1e-12);
                break;
            }
            mu *= 10.0;
        }
        prob.evaluate(p, r, &jac);
        if (!improved) {
            // Nothing representable lowers the cost; fine if we are at rounding level.
            const double c = max_cosine(jac, r);
            if (c <= 1e-6 || r.norm() <= 1e3 * floor) break;
            throw ConvergenceError("fit_fringe: stalled with residual/Jacobian cosine " + std::to_string(c));
        }
    }

    if (p[1] < 0.0) {
        p[1] = -p[1];
        p[2] += std::numbers::pi;
    }
    p[2] = detail::wrap_phase(p[2]);
    prob.evaluate(p, r, &jac);

    FringeFit fit;
    fit.t_sep = scan.t_sep;
    fit.n_points = static_cast<std::size_t>(n);
    fit.iterations = iter;
    fit.p_mean = p[0];
    fit.contrast = p[1];
    fit.alpha0 = prob.alpha_ref + p[2] / prob.t2;

    double rss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double res = prob.y[i] - p[0] - 0.5 * p[1] * std::cos(p[2] - prob.x[i]);
        rss += res * res;
    }
    fit.residual_rms = std::sqrt(rss / static_cast<double>(n));
    const double s2 = r.squaredNorm() / static_cast<double>(n - 3);
    const double data_rms = prob.y.norm() / std::sqrt(static_cast<double>(n));
    if (std::abs(p[1]) > 1e-12 * data_rms) {
        const Eigen::Matrix3d cov = s2 * (jac.transpose() * jac).inverse();
        fit.sigma_p_mean = std::sqrt(std::max(0.0, cov(0, 0)));
        fit.sigma_c = std::sqrt(std::max(0.0, cov(1, 1)));
        fit.sigma_alpha0 = std::sqrt(std::max(0.0, cov(2, 2))) / prob.t2;
    } else {
        // Phase is unidentified at zero amplitude (up to rounding).
        const Eigen::Matrix2d cov = s2 * (jac.leftCols(2).transpose() * jac.leftCols(2)).inverse();
        fit.sigma_p_mean = std::sqrt(std::max(0.0, cov(0, 0)));
        fit.sigma_c = std::sqrt(std::max(0.0, cov(1, 1)));
        fit.sigma_alpha0 = std::numeric_limits<double>::infinity();
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Contrast decay: ln C(T) = ln C0 - (regressor) lambda

struct ContrastPoint {
    double t_sep = 0.0;
    double contrast = 0.0;
    double sigma_c = 0.0;
};

struct ContrastSeries {
    std::vector<ContrastPoint> points;
};

struct DecayFit {
    double ln_c0 = 0.0;
    double lambda_fit = 0.0;
    double sigma_lambda = 0.0;
    std::array<std::array<double, 2>, 2> covariance{};  // (ln C0, lambda)
    double chi2 = 0.0;
    std::size_t used_points = 0;
    std::vector<std::size_t> excluded;  // indices dropped for C <= 3 sigma_C
    std::vector<std::string> warnings;
};

inline void validate_series(const ContrastSeries& series) {
    std::set<double> distinct;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        if (!(p.t_sep > 0.0)) throw DataError("contrast series: t_s must be > 0 at row " + std::to_string(i));
        if (!(p.contrast > 0.0 && p.contrast <= 1.0))
            throw DataError("contrast series: contrast outside (0, 1] at row " + std::to_string(i));
        if (!(p.sigma_c > 0.0)) throw DataError("contrast series: sigma_c must be > 0 at row " + std::to_string(i));
        distinct.insert(p.t_sep);
    }
    if (distinct.size() < 3) throw DegenerateScanError("contrast series: need at least 3 distinct T values");
}

namespace detail {

// Weighted regression of ln C on regressor(T) with weights (C / sigma_C)^2;
// lambda = -slope * scale.
inline DecayFit regress_log_contrast(const ContrastSeries& series,
                                     const std::function<double(double)>& regressor, double scale) {
    DecayFit fit;
    std::vector<double> xs, ys, ws;
    std::set<double> distinct;
    for (std::size_t i = 0; i < series.points.size(); ++i) {
        const auto& p = series.points[i];
        if (!(p.contrast > 0.0) || !(p.sigma_c > 0.0) || p.contrast <= 3.0 * p.sigma_c) {
            fit.excluded.push_back(i);
            std::ostringstream msg;
            msg << "point " << i << " (T = " << p.t_sep << " s) excluded: C = " << p.contrast
                << " <= 3 sigma_C = " << 3.0 * p.sigma_c;
            fit.warnings.push_back(msg.str());
            continue;
        }
        const double sigma_ln = p.sigma_c / p.contrast;
        xs.push_back(regressor(p.t_sep));
        ys.push_back(std::log(p.contrast));
        ws.push_back(1.0 / (sigma_ln * sigma_ln));
        distinct.insert(p.t_sep);
    }
    if (distinct.size() < 2) throw DegenerateScanError("contrast fit: singular normal matrix (fewer than 2 distinct T)");

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        swx += ws[i] * xs[i];
        swy += ws[i] * ys[i];
        swxx += ws[i] * xs[i] * xs[i];
        swxy += ws[i] * xs[i] * ys[i];
    }
    // Centre the regressor for a well-conditioned solve.
    const double xbar = swx / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - xbar;
        sxx += ws[i] * dx * dx;
        sxy += ws[i] * dx * ys[i];
    }
    if (!(sxx > 0.0)) throw DegenerateScanError("contrast fit: singular normal matrix");
    const double slope = sxy / sxx;
    const double intercept = swy / sw - slope * xbar;
    const double var_slope = 1.0 / sxx;
    const double var_intercept = 1.0 / sw + xbar * xbar / sxx;
    const double cov_is = -xbar / sxx;

    fit.ln_c0 = intercept;
    fit.lambda_fit = -slope * scale;
    fit.covariance[0][0] = var_intercept;
    fit.covariance[0][1] = fit.covariance[1][0] = -cov_is * scale;
    fit.covariance[1][1] = var_slope * scale * scale;
    fit.sigma_lambda = std::sqrt(fit.covariance[1][1]);
    fit.used_points = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - intercept - slope * xs[i];
        fit.chi2 += ws[i] * res * res;
    }
    return fit;
}

}  // namespace detail

/// Weighted fit of ln C = ln C0 - 2 lambda N^2 T.
inline DecayFit fit_contrast_decay(const ContrastSeries& series, const AtomSpecies& species) {
    return detail::regress_log_contrast(series, [](double t) { return t; },
                                        1.0 / (2.0 * species.nucleon_count_sq()));
}

/// Weighted fit of ln C = ln C0 - phase_variance(lambda, r_c; T) / 2, linear in lambda.
inline DecayFit fit_lambda_at_rc(const ContrastSeries& series, double r_c, const AtomSpecies& species,
                                 const ArmGeometry& geometry) {
    if (!(r_c > 0.0)) throw std::invalid_argument("fit_lambda_at_rc: r_c must be > 0");
    const CslParams unit{1.0, r_c};
    return detail::regress_log_contrast(
        series,
        [&](double t) {
            return 0.5 * phase_variance(unit, species, InterferometerConfig::from_geometry(geometry, t));
        },
        1.0);
}

struct BoundPolicy {
    enum class Kind { fit_value, fit_plus_k_sigma };
    Kind kind = Kind::fit_value;
    double k = 0.0;

    static BoundPolicy fit_value() { return {}; }
    static BoundPolicy fit_plus_k_sigma(double k) { return {Kind::fit_plus_k_sigma, k}; }
};

struct LambdaBound {
    double value = 0.0;  // 1/s
    double sigma = 0.0;  // reported alongside
};

inline LambdaBound lambda_upper_bound(const DecayFit& fit, const BoundPolicy& policy = {}) {
    const double clamped = std::max(fit.lambda_fit, 0.0);
    if (policy.kind == BoundPolicy::Kind::fit_plus_k_sigma) {
        return {clamped + policy.k * fit.sigma_lambda, fit.sigma_lambda};
    }
    return {clamped, fit.sigma_lambda};
}

// ---------------------------------------------------------------------------
// Exclusion curve

enum class BoundSource { interferometric, overlap };

inline const char* to_string(BoundSource s) {
    return s == BoundSource::overlap ? "overlap" : "interferometric";
}

struct ExclusionSample {
    double r_c = 0.0;
    double lambda_bound = 0.0;
    BoundSource source = BoundSource::interferometric;
};

struct ExclusionCurve {
    std::vector<ExclusionSample> samples;
    std::optional<double> crossover_rc;
    double overlap_slope = 0.0;  // lambda / r_C^2 bound, m^-2 s^-1
};

/// Log-spaced grid of `count` points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw std::invalid_argument("log_grid: need 0 < lo <= hi, count >= 1");
    std::vector<double> g(static_cast<std::size_t>(count));
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// Combine an interferometric bound lambda(r_C) with the overlap bound slope * r_C^2.
inline ExclusionCurve exclusion_curve(const std::function<double(double)>& interferometric,
                                      double overlap_slope, const std::vector<double>& rc_grid) {
    if (!std::is_sorted(rc_grid.begin(), rc_grid.end()))
        throw std::invalid_argument("exclusion_curve: r_C grid must be sorted");
    for (double r : rc_grid)
        if (!(r > 0.0)) throw std::invalid_argument("exclusion_curve: r_C grid must be positive");
    ExclusionCurve curve;
    curve.overlap_slope = overlap_slope;
    std::vector<double> interf(rc_grid.size());
    for (std::size_t i = 0; i < rc_grid.size(); ++i) {
        const double r = rc_grid[i];
        interf[i] = interferometric(r);
        const double overlap = overlap_slope * r * r;
        const bool use_overlap = overlap < interf[i];
        curve.samples.push_back({r, use_overlap ? overlap : interf[i],
                                 use_overlap ? BoundSource::overlap : BoundSource::interferometric});
    }
    for (std::size_t i = 0; i + 1 < curve.samples.size(); ++i) {
        if (curve.samples[i].source == curve.samples[i + 1].source) continue;
        // Bisect interf(r) - slope r^2 in log r.
        auto excess = [&](double r) { return interferometric(r) - overlap_slope * r * r; };
        double lo = std::log(rc_grid[i]);
        double hi = std::log(rc_grid[i + 1]);
        const double f_lo = interf[i] - overlap_slope * rc_grid[i] * rc_grid[i];
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f_mid = excess(std::exp(mid));
            if ((f_mid > 0.0) == (f_lo > 0.0)) lo = mid; else hi = mid;
        }
        curve.crossover_rc = std::exp(0.5 * (lo + hi));
        break;
    }
    return curve;
}

struct ExclusionOptions {
    double safety = wavepacket::kDefaultSafety;
    BoundPolicy policy{};
    std::optional<double> two_t;  // recombination time for the overlap bound; default 2 max(T)
};

/// Exclusion curve from a measured contrast series: the interferometric bound
/// at each r_C comes from fit_lambda_at_rc, the overlap bound from the wave
/// packet of initial width `sigma`.
inline ExclusionCurve exclusion_curve(const ContrastSeries& series, const AtomSpecies& species,
                                      const ArmGeometry& geometry, double sigma,
                                      const std::vector<double>& rc_grid,
                                      const ExclusionOptions& opts = {}) {
    double t_max = 0.0;
    for (const auto& p : series.points) t_max = std::max(t_max, p.t_sep);
    const double two_t = opts.two_t.value_or(2.0 * t_max);
    const double slope = wavepacket::overlap_bound(sigma, two_t, species, opts.safety);
    auto interf = [&](double r_c) {
        return lambda_upper_bound(fit_lambda_at_rc(series, r_c, species, geometry), opts.policy).value;
    };
    return exclusion_curve(interf, slope, rc_grid);
}

// ---------------------------------------------------------------------------
// Synthetic fringes

struct SynthTruth {
    double lambda = 0.0;
    double r_c = 1e-7;
    double c0 = 1.0;
    double p_mean = 0.5;
};

struct SynthNoise {
    double sigma_p = 0.0;
    std::uint64_t seed = 1;
};

struct SynthLayout {
    int points = 40;
    double periods = 2.0;  // alpha span in fringe periods, centred on alpha0 = k_eff g
};

struct SynthResult {
    std::vector<FringeScan> scans;
    std::int64_t clamp_count = 0;
};

/// Scans generated from P = p_mean + C/2 cos((k_eff g - alpha) T^2) with
/// C = c0 exp(-phase_variance / 2), Gaussian read noise, clamped to [0, 1].
/// Scan i draws from the seed's stream jumped i times.
inline SynthResult synth_fringes(const SynthTruth& truth, const AtomSpecies& species,
                                 const ArmGeometry& geometry, const std::vector<double>& t_list,
                                 const SynthNoise& noise, const SynthLayout& layout = {}) {
    if (layout.points < 2 || !(layout.periods > 0.0)) throw std::invalid_argument("synth_fringes: invalid layout");
    const CslParams csl{truth.lambda, truth.r_c};
    csl.validate();
    SynthResult out;
    Xoshiro256pp stream(noise.seed);
    boost::random::normal_distribution<double> normal;
    for (double t : t_list) {
        Xoshiro256pp eng = stream;
        stream.jump();
        const auto ifo = InterferometerConfig::from_geometry(geometry, t);
        ifo.validate();
        const double c = truth.c0 * contrast(csl, species, ifo);
        const double alpha0 = ifo.k_eff(species) * ifo.g;
        const double span = layout.periods * fringe_period(t);
        FringeScan scan;
        scan.t_sep = t;
        for (int i = 0; i < layout.points; ++i) {
            const double alpha = alpha0 + (static_cast<double>(i) / (layout.points - 1) - 0.5) * span;
            double p = truth.p_mean + 0.5 * c * std::cos((alpha0 - alpha) * t * t) + noise.sigma_p * normal(eng);
            if (p < 0.0 || p > 1.0) {
                ++out.clamp_count;
                p = std::clamp(p, 0.0, 1.0);
            }
            scan.points.push_back({alpha, p, std::nullopt});
        }
        out.scans.push_back(std::move(scan));
    }
    return out;
}

/// Contrast series from per-T fringe fits.
inline ContrastSeries contrast_series(const std::vector<FringeFit>& fits) {
    ContrastSeries s;
    for (const auto& f : fits) s.points.push_back({f.t_sep, f.contrast, f.sigma_c});
    return s;
}

}  // namespace csl::inference
