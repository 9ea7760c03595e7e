#pragma once

// Monte Carlo oracle for the CSL phase. The white-noise field is never put on
// a grid: over a time step the two arms' potentials differ by a Gaussian
// increment whose variance follows from collapsing the spatial integral,
//   2 lambda N^2 [1 - exp(-d^2 / (4 r_C^2))] dt,   d = arm separation.
// A sample of dphi_CSL is the sum of independent such increments along the
// closed loop; nothing here uses the erf closed form.
//
// Samples are processed in fixed-size blocks. Block b draws from its own
// xoshiro substream (base stream jumped b times), and block moments are merged
// by a fixed pairwise tree, so results depend on (seed, dt, parameters) only,
// never on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <numbers>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "csl/rng.hpp"
#include "csl/types.hpp"

namespace csl::stochastic {

inline constexpr std::int64_t kBlockSize = 1024;

struct Breakpoint {
    double t;  // s
    double z;  // m
};

/// Upper (ABC) and lower (ADC) arm trajectories as piecewise-linear breakpoints.
struct PathPair {
    std::vector<Breakpoint> upper;
    std::vector<Breakpoint> lower;

    /// Freely falling frame: AB = v2 t, AD = v1 t on [0, T]; BC = v2 T + v1 (t - T),
    /// DC = v1 T + v2 (t - T) on [T, 2T].
    static PathPair mach_zehnder(const InterferometerConfig& ifo) {
        const double t = ifo.t_sep;
        PathPair p;
        p.upper = {{0.0, 0.0}, {t, ifo.v2 * t}, {2.0 * t, ifo.v2 * t + ifo.v1 * t}};
        p.lower = {{0.0, 0.0}, {t, ifo.v1 * t}, {2.0 * t, ifo.v1 * t + ifo.v2 * t}};
        return p;
    }

    double duration() const { return upper.back().t; }

    static double position(const std::vector<Breakpoint>& path, double t) {
        if (t <= path.front().t) return path.front().z;
        for (std::size_t i = 1; i < path.size(); ++i) {
            if (t <= path[i].t) {
                const auto& a = path[i - 1];
                const auto& b = path[i];
                return a.z + (b.z - a.z) * (t - a.t) / (b.t - a.t);
            }
        }
        return path.back().z;
    }

    double separation(double t) const { return std::abs(position(upper, t) - position(lower, t)); }

    bool closed(double tol = 0.0) const {
        return std::abs(upper.front().z - lower.front().z) <= tol &&
               std::abs(upper.back().z - lower.back().z) <= tol &&
               upper.front().t == lower.front().t && upper.back().t == lower.back().t;
    }
};

/// Time resolution and seed of the sampled noise.
///
/// With refinement r > 0 the increments on the dt grid are obtained by r
/// Brownian-bridge halvings of a grid 2^r dt coarser, so runs at dt and dt/2
/// (refinement 1) with the same seed see the same noise path.
struct NoiseModel {
    std::uint64_t seed = 1;
    double dt = 1e-5;  // s
    int refinement = 0;

    void validate(double t_sep) const {
        if (!(dt > 0.0)) throw std::invalid_argument("NoiseModel: dt must be > 0");
        if (dt > t_sep / 100.0 * (1.0 + 1e-12))
            throw std::invalid_argument("NoiseModel: dt must not exceed T/100");
        if (refinement < 0 || refinement > 8) throw std::invalid_argument("NoiseModel: refinement must be in [0, 8]");
    }

    /// Same noise path sampled at half the step.
    NoiseModel halved() const { return {seed, 0.5 * dt, refinement + 1}; }
};

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;  // sqrt(variance / n_samples)
    std::int64_t n_samples = 0;
};

struct MonteCarloSummary {
    McEstimate phase;                // dphi_CSL samples
    double variance_std_error = 0.0; // of phase.variance, from the 4th central moment
    double excess_kurtosis = 0.0;
    McEstimate contrast;             // |E exp(i dphi)| with a delta-method std_error
    std::int64_t steps = 0;          // time steps per sample
    double dt = 0.0;                 // effective step, s
    std::int64_t blocks = 0;
};

/// Variance of the arm-difference phase increment over one step:
/// 2 lambda N^2 [1 - exp(-d^2 / (4 r_C^2))] dt.
inline double step_variance(const CslParams& csl, const AtomSpecies& species, double separation,
                            double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_variance: dt must be > 0");
    if (!(separation >= 0.0)) throw std::invalid_argument("step_variance: separation must be >= 0");
    const double x = separation / (2.0 * csl.r_c);
    return 2.0 * csl.lambda * species.nucleon_count_sq() * -std::expm1(-x * x) * dt;
}

namespace detail {

// Raw power sums; the phase has zero mean so no shifting is needed.
struct Moments {
    double n = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    double dc = 0, sn = 0, dc2 = 0, sn2 = 0, dcsn = 0;  // dc = 1 - cos, sn = sin

    void add(double x) {
        const double x2 = x * x;
        n += 1;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        const double half_sin = std::sin(0.5 * x);
        const double d = 2.0 * half_sin * half_sin;
        const double s = std::sin(x);
        dc += d;
        sn += s;
        dc2 += d * d;
        sn2 += s * s;
        dcsn += d * s;
    }

    Moments& operator+=(const Moments& o) {
        n += o.n; s1 += o.s1; s2 += o.s2; s3 += o.s3; s4 += o.s4;
        dc += o.dc; sn += o.sn; dc2 += o.dc2; sn2 += o.sn2; dcsn += o.dcsn;
        return *this;
    }
};

inline Moments pairwise_reduce(std::vector<Moments> parts) {
    if (parts.empty()) return {};
    while (parts.size() > 1) {
        std::vector<Moments> next;
        next.reserve((parts.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
            Moments m = parts[i];
            m += parts[i + 1];
            next.push_back(m);
        }
        if (parts.size() % 2 == 1) next.push_back(parts.back());
        parts = std::move(next);
    }
    return parts.front();
}

inline MonteCarloSummary summarize(const Moments& m) {
    MonteCarloSummary out;
    const double n = m.n;
    const double mu = m.s1 / n;
    const double e2 = m.s2 / n;
    const double e3 = m.s3 / n;
    const double e4 = m.s4 / n;
    const double c2 = std::max(0.0, e2 - mu * mu);
    const double c4 = e4 - 4.0 * mu * e3 + 6.0 * mu * mu * e2 - 3.0 * mu * mu * mu * mu;
    out.phase.n_samples = static_cast<std::int64_t>(n);
    out.phase.mean = mu;
    out.phase.variance = c2 * n / (n - 1.0);
    out.phase.std_error = std::sqrt(out.phase.variance / n);
    out.variance_std_error = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
    out.excess_kurtosis = c2 > 0.0 ? c4 / (c2 * c2) - 3.0 : 0.0;

    const double dbar = m.dc / n;
    const double cbar = 1.0 - dbar;
    const double sbar = m.sn / n;
    const double c = std::hypot(cbar, sbar);
    const double var_c = std::max(0.0, m.dc2 / n - dbar * dbar) * n / (n - 1.0);
    const double var_s = std::max(0.0, m.sn2 / n - sbar * sbar) * n / (n - 1.0);
    const double cov_cs = -(m.dcsn / n - dbar * sbar) * n / (n - 1.0);
    double proj_var = 0.0;
    if (c > 0.0) {
        proj_var = (cbar * cbar * var_c + sbar * sbar * var_s + 2.0 * cbar * sbar * cov_cs) / (c * c);
        proj_var = std::max(0.0, proj_var);
    }
    out.contrast.n_samples = out.phase.n_samples;
    out.contrast.mean = c;
    out.contrast.variance = proj_var;
    out.contrast.std_error = std::sqrt(proj_var / n);
    return out;
}

}  // namespace detail

/// Draws dphi_CSL samples for a fixed parameter set.
class PhaseSampler {
public:
    PhaseSampler(const CslParams& csl, const AtomSpecies& species, const PathPair& paths,
                 const NoiseModel& noise)
        : noise_(noise) {
        const double duration = paths.duration();
        noise.validate(0.5 * duration);
        // The coarsest grid has an even number of steps so t = T is a grid point.
        const double coarse_dt = noise.dt * std::ldexp(1.0, noise.refinement);
        const auto half_steps = static_cast<std::int64_t>(std::ceil(0.5 * duration / coarse_dt - 1e-9));
        coarse_steps_ = 2 * std::max<std::int64_t>(half_steps, 1);
        const std::int64_t steps = coarse_steps_ << noise.refinement;
        dt_ = duration / static_cast<double>(steps);
        step_sd_.resize(static_cast<std::size_t>(steps));
        for (std::int64_t i = 0; i < steps; ++i) {
            const double t_mid = (static_cast<double>(i) + 0.5) * dt_;
            step_sd_[static_cast<std::size_t>(i)] =
                std::sqrt(step_variance(csl, species, paths.separation(t_mid), dt_));
        }
    }

    std::int64_t steps() const { return static_cast<std::int64_t>(step_sd_.size()); }
    double dt() const { return dt_; }
    const NoiseModel& noise() const { return noise_; }

    /// Sum of the step variances, the exact variance of every draw.
    double discretized_variance() const {
        double acc = 0.0;
        for (double sd : step_sd_) acc += sd * sd;
        return acc;
    }

    /// Engines for block `block`: level l is the base stream long-jumped l
    /// times, then jumped `block` times.
    std::vector<Xoshiro256pp> block_engines(std::int64_t block) const {
        std::vector<Xoshiro256pp> engines;
        Xoshiro256pp level(noise_.seed);
        for (int l = 0; l <= noise_.refinement; ++l) {
            Xoshiro256pp e = level;
            for (std::int64_t b = 0; b < block; ++b) e.jump();
            engines.push_back(e);
            level.long_jump();
        }
        return engines;
    }

    /// One draw; `engines` must hold refinement + 1 generators.
    double draw(std::vector<Xoshiro256pp>& engines) const {
        boost::random::normal_distribution<double> normal;
        if (noise_.refinement == 0) {
            auto& eng = engines[0];
            double acc = 0.0;
            for (double sd : step_sd_) acc += sd * normal(eng);
            return acc;
        }
        std::vector<double> z(static_cast<std::size_t>(coarse_steps_));
        for (auto& v : z) v = normal(engines[0]);
        for (int l = 1; l <= noise_.refinement; ++l) {
            std::vector<double> finer(2 * z.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double zeta = normal(engines[static_cast<std::size_t>(l)]);
                finer[2 * i] = (z[i] + zeta) * std::numbers::sqrt2 * 0.5;
                finer[2 * i + 1] = (z[i] - zeta) * std::numbers::sqrt2 * 0.5;
            }
            z = std::move(finer);
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) acc += step_sd_[i] * z[i];
        return acc;
    }

    /// Calls visit(block, index_in_block, value) for n draws, blocks spread over `threads` workers.
    template <class Visit>
    void for_each_block(std::int64_t n_samples, unsigned threads, Visit&& visit_block) const {
        const std::int64_t blocks = (n_samples + kBlockSize - 1) / kBlockSize;
        std::vector<std::vector<Xoshiro256pp>> engines;
        engines.reserve(static_cast<std::size_t>(blocks));
        {
            // Sequential jumps: block b+1 starts where block b's stream is jumped once.
            std::vector<Xoshiro256pp> current = block_engines(0);
            for (std::int64_t b = 0; b < blocks; ++b) {
                engines.push_back(current);
                for (auto& e : current) e.jump();
            }
        }
        auto run = [&](std::int64_t b) {
            const std::int64_t begin = b * kBlockSize;
            const std::int64_t count = std::min(kBlockSize, n_samples - begin);
            visit_block(b, count, engines[static_cast<std::size_t>(b)]);
        };
        if (threads <= 1 || blocks <= 1) {
            for (std::int64_t b = 0; b < blocks; ++b) run(b);
            return;
        }
        std::atomic<std::int64_t> next{0};
        std::vector<std::jthread> pool;
        const auto workers = std::min<std::int64_t>(threads, blocks);
        for (std::int64_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::int64_t b = next++; b < blocks; b = next++) run(b);
            });
        }
    }

    std::vector<double> sample(std::int64_t n_samples, unsigned threads = 1) const {
        std::vector<double> out(static_cast<std::size_t>(n_samples));
        for_each_block(n_samples, threads, [&](std::int64_t b, std::int64_t count, std::vector<Xoshiro256pp>& eng) {
            for (std::int64_t i = 0; i < count; ++i)
                out[static_cast<std::size_t>(b * kBlockSize + i)] = draw(eng);
        });
        return out;
    }

    MonteCarloSummary summarize(std::int64_t n_samples, unsigned threads = 1) const {
        if (n_samples < 2) throw std::invalid_argument("Monte Carlo: need at least 2 samples");
        const std::int64_t blocks = (n_samples + kBlockSize - 1) / kBlockSize;
        std::vector<detail::Moments> parts(static_cast<std::size_t>(blocks));
        for_each_block(n_samples, threads, [&](std::int64_t b, std::int64_t count, std::vector<Xoshiro256pp>& eng) {
            detail::Moments m;
            for (std::int64_t i = 0; i < count; ++i) m.add(draw(eng));
            parts[static_cast<std::size_t>(b)] = m;
        });
        auto out = detail::summarize(detail::pairwise_reduce(std::move(parts)));
        out.steps = steps();
        out.dt = dt_;
        out.blocks = blocks;
        return out;
    }

private:
    NoiseModel noise_;
    std::int64_t coarse_steps_ = 0;
    double dt_ = 0.0;
    std::vector<double> step_sd_;
};

/// One draw of dphi_CSL: the first sample of the seeded stream.
inline double sample_phase(const CslParams& csl, const AtomSpecies& species, const PathPair& paths,
                           const NoiseModel& noise) {
    PhaseSampler sampler(csl, species, paths, noise);
    auto engines = sampler.block_engines(0);
    return sampler.draw(engines);
}

inline MonteCarloSummary run_monte_carlo(const CslParams& csl, const AtomSpecies& species,
                                         const InterferometerConfig& ifo, std::int64_t n_samples,
                                         const NoiseModel& noise, unsigned threads = 1) {
    csl.validate();
    species.validate();
    ifo.validate();
    PhaseSampler sampler(csl, species, PathPair::mach_zehnder(ifo), noise);
    return sampler.summarize(n_samples, threads);
}

/// Contrast |E exp(i dphi_CSL)| estimated from n_samples >= 100 draws.
inline McEstimate estimate_contrast_mc(const CslParams& csl, const AtomSpecies& species,
                                       const InterferometerConfig& ifo, std::int64_t n_samples,
                                       const NoiseModel& noise, unsigned threads = 1) {
    if (n_samples < 100) throw std::invalid_argument("estimate_contrast_mc: n_samples must be >= 100");
    return run_monte_carlo(csl, species, ifo, n_samples, noise, threads).contrast;
}

}  // namespace csl::stochastic
