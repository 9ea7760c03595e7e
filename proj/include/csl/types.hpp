#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace csl {

struct PhysicalConstants {
    double hbar;  // J s
    double m0;    // kg, one atomic mass unit
};

inline constexpr PhysicalConstants kConstants{1.054571817e-34, 1.66053906660e-27};

/// The two phenomenological collapse parameters.
struct CslParams {
    double lambda = 0.0;  // collapse rate, 1/s
    double r_c = 1e-7;    // correlation length, m

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("CslParams: lambda must be finite and >= 0");
        if (!(r_c > 0.0) || !std::isfinite(r_c)) throw std::invalid_argument("CslParams: r_c must be finite and > 0");
    }
};

struct AtomSpecies {
    std::int64_t nucleon_count = 87;
    double mass = 1.44e-25;  // kg

    /// m/m0, the mass-proportional coupling (86.72 for 87Rb, vs N = 87).
    double mass_ratio() const { return mass / kConstants.m0; }
    double nucleon_count_sq() const {
        const auto n = static_cast<double>(nucleon_count);
        return n * n;
    }

    void validate() const {
        if (nucleon_count < 1) throw std::invalid_argument("AtomSpecies: nucleon_count must be >= 1");
        if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("AtomSpecies: mass must be > 0");
    }

    static AtomSpecies rubidium87() { return {}; }

    /// A species whose mass is exactly N atomic mass units, so N^2 and (m/m0)^2 coincide.
    static AtomSpecies with_unit_nucleon_mass(std::int64_t n) {
        return {n, static_cast<double>(n) * kConstants.m0};
    }
};

/// Arm velocities and gravity: the parts of the interferometer shared by every pulse separation.
struct ArmGeometry {
    double v1 = 0.0;       // m/s
    double v2 = 11e-3;     // m/s
    double g = 9.812;      // m/s^2

    double velocity_split() const { return std::abs(v2 - v1); }
};

struct InterferometerConfig {
    double t_sep = 0.26;   // T, s; total duration 2T
    double v1 = 0.0;
    double v2 = 11e-3;
    double alpha = 0.0;    // chirp rate, rad/s^2
    double g = 9.812;

    static InterferometerConfig from_geometry(const ArmGeometry& geo, double t_sep, double alpha = 0.0) {
        return {t_sep, geo.v1, geo.v2, alpha, geo.g};
    }

    ArmGeometry geometry() const { return {v1, v2, g}; }
    double velocity_split() const { return std::abs(v2 - v1); }
    double duration() const { return 2.0 * t_sep; }

    /// k_eff = m (v2 - v1) / hbar.
    double k_eff(const AtomSpecies& species) const {
        return species.mass * (v2 - v1) / kConstants.hbar;
    }

    void validate() const {
        if (!(t_sep > 0.0) || !std::isfinite(t_sep)) throw std::invalid_argument("InterferometerConfig: t_sep must be > 0");
        if (!std::isfinite(v1) || !std::isfinite(v2) || !std::isfinite(alpha) || !std::isfinite(g))
            throw std::invalid_argument("InterferometerConfig: non-finite field");
    }
};

}  // namespace csl
