#pragma once

// Closed-form CSL phase statistics for a symmetric Mach-Zehnder light-pulse
// interferometer: stochastic phase variance, contrast damping and the
// population signal. All functions are pure.

#include <cmath>
#include <numbers>

#include "csl/erf.hpp"
#include "csl/types.hpp"

namespace csl {

struct PhaseStatistics {
    double mean_phase = 0.0;      // rad; the CSL noise has zero mean
    double phase_variance = 0.0;  // rad^2
    double damping_factor = 1.0;  // exp(-variance/2)
};

/// 1 - (sqrt(pi)/2) erf(u)/u, the normalised loss of arm overlap.
///
/// The direct form cancels catastrophically for small u, so below u = 1 the
/// Maclaurin series u^2/3 - u^4/10 + u^6/42 - ... is summed until the terms
/// drop under one ulp of the partial sum. Even in u; tends to 1 as u -> inf.
inline double overlap_loss(double u) {
    u = std::abs(u);
    if (u == 0.0) return 0.0;
    if (u < 1.0) {
        // sum_{n>=1} (-1)^(n+1) u^(2n) / (n! (2n+1))
        const double u2 = u * u;
        double power = 1.0;  // (-1)^(n+1) u^(2n) / n!
        double sum = 0.0;
        for (int n = 1; n < 60; ++n) {
            power *= (n == 1 ? u2 : -u2 / n);
            const double term = power / (2.0 * n + 1.0);
            sum += term;
            if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    return 1.0 - 0.5 * std::numbers::inv_sqrtpi * std::numbers::pi * csl::erf(u) / u;
}

/// Dimensionless arm-separation parameter u = |v2 - v1| T / (2 r_C).
inline double separation_parameter(const CslParams& csl, const InterferometerConfig& ifo) {
    return ifo.velocity_split() * ifo.t_sep / (2.0 * csl.r_c);
}

/// E[dphi_CSL^2] = 4 lambda N^2 T [1 - (sqrt(pi)/2) erf(u)/u].
inline double phase_variance(const CslParams& csl, const AtomSpecies& species,
                             const InterferometerConfig& ifo) {
    const double u = separation_parameter(csl, ifo);
    return 4.0 * csl.lambda * species.nucleon_count_sq() * ifo.t_sep * overlap_loss(u);
}

/// Arms separated by much more than r_C: the erf term drops out.
inline double phase_variance_small_rc(const CslParams& csl, const AtomSpecies& species,
                                      const InterferometerConfig& ifo) {
    return 4.0 * csl.lambda * species.nucleon_count_sq() * ifo.t_sep;
}

/// Arms always well inside r_C: leading Taylor term, lambda N^2 dv^2 T^3 / (3 r_C^2).
inline double phase_variance_large_rc(const CslParams& csl, const AtomSpecies& species,
                                      const InterferometerConfig& ifo) {
    const double dv = ifo.velocity_split();
    const double t = ifo.t_sep;
    return csl.lambda * species.nucleon_count_sq() * dv * dv * t * t * t /
           (3.0 * csl.r_c * csl.r_c);
}

/// Laser phase (k_eff g - alpha) T^2; vanishes for the compensating chirp alpha = k_eff g.
inline double mz_phase(const InterferometerConfig& ifo, const AtomSpecies& species) {
    return (ifo.k_eff(species) * ifo.g - ifo.alpha) * ifo.t_sep * ifo.t_sep;
}

inline double contrast_from_variance(double variance) { return std::exp(-0.5 * variance); }

inline double contrast(const CslParams& csl, const AtomSpecies& species,
                       const InterferometerConfig& ifo) {
    return contrast_from_variance(phase_variance(csl, species, ifo));
}

/// Population for a given phase offset dphi0 and CSL phase variance.
inline double population_at(double phase_offset, double variance) {
    const double p = 0.5 * (1.0 + contrast_from_variance(variance) * std::cos(phase_offset));
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

/// 1/2 [1 + exp(-E[dphi^2]/2) cos(dphi0)].
inline double population(const CslParams& csl, const AtomSpecies& species,
                         const InterferometerConfig& ifo) {
    return population_at(mz_phase(ifo, species), phase_variance(csl, species, ifo));
}

inline PhaseStatistics phase_statistics(const CslParams& csl, const AtomSpecies& species,
                                        const InterferometerConfig& ifo) {
    const double var = phase_variance(csl, species, ifo);
    return {0.0, var, contrast_from_variance(var)};
}

}  // namespace csl
