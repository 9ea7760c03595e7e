#pragma once

// Gaussian wave-packet view of CSL in the interferometer: free spreading,
// the CSL decoherence kernel F, damping of the coherences between the two
// packets, CSL heating/diffusion and the overlap bound on lambda / r_C^2.

#include <array>
#include <cmath>
#include <sstream>

#include "csl/errors.hpp"
#include "csl/phase.hpp"
#include "csl/quadrature.hpp"
#include "csl/types.hpp"

namespace csl::wavepacket {

inline constexpr double kDefaultSafety = 0.1;
inline constexpr double kSeparationMargin = 10.0;

struct WavePacketPair {
    double sigma = 1e-6;  // initial width, m
    double k1 = 0.0;      // m^-1
    double k2 = 0.0;
    AtomSpecies species{};

    /// Packets launched with the arm velocities of `geo` (k_j = m v_j / hbar).
    static WavePacketPair from_geometry(const AtomSpecies& species, const ArmGeometry& geo,
                                        double sigma) {
        const double scale = species.mass / kConstants.hbar;
        return {sigma, scale * geo.v1, scale * geo.v2, species};
    }

    double wave_number_split() const { return std::abs(k1 - k2); }

    /// |x1 - x2| at time t, hbar t |k1 - k2| / m.
    double centre_separation(double t) const {
        return kConstants.hbar * t * wave_number_split() / species.mass;
    }
};

struct SpreadReport {
    double sigma_t_mag = 0.0;     // |sigma_t|, m
    double ell_t = 0.0;           // physical spread, m
    double csl_variance = 0.0;    // m^2
    double total_variance = 0.0;  // ell_t^2 + csl_variance, m^2
};

/// Dimensionless spreading hbar t / (2 m sigma^2).
inline double spreading_ratio(double sigma, double t, const AtomSpecies& species) {
    return kConstants.hbar * t / (2.0 * species.mass * sigma * sigma);
}

/// ell_t = sigma sqrt(1 + hbar^2 t^2 / (4 m^2 sigma^4)).
inline double ell_t(double sigma, double t, const AtomSpecies& species) {
    return sigma * std::hypot(1.0, spreading_ratio(sigma, t, species));
}

/// Modulus of the complex width sigma_t = sigma sqrt(1 + i hbar t / (2 m sigma^2)).
inline double sigma_t_magnitude(double sigma, double t, const AtomSpecies& species) {
    return sigma * std::sqrt(std::hypot(1.0, spreading_ratio(sigma, t, species)));
}

/// <dz^2>_CSL = lambda hbar^2 t^3 / (6 m0^2 r_C^2); independent of the atom's mass.
inline double csl_position_variance(const CslParams& csl, const AtomSpecies& /*species*/, double t) {
    const double hbar = kConstants.hbar;
    const double m0 = kConstants.m0;
    return csl.lambda * hbar * hbar * t * t * t / (6.0 * m0 * m0 * csl.r_c * csl.r_c);
}

/// Mean energy gained from CSL diffusion, 3 m hbar^2 lambda t / (4 m0^2 r_C^2).
inline double heating_energy(const CslParams& csl, const AtomSpecies& species, double t) {
    const double hbar = kConstants.hbar;
    const double m0 = kConstants.m0;
    return 3.0 * species.mass * hbar * hbar * csl.lambda * t /
           (4.0 * m0 * m0 * csl.r_c * csl.r_c);
}

inline SpreadReport spread_report(const CslParams& csl, const AtomSpecies& species, double sigma,
                                  double t) {
    SpreadReport r;
    r.sigma_t_mag = sigma_t_magnitude(sigma, t, species);
    r.ell_t = ell_t(sigma, t, species);
    r.csl_variance = csl_position_variance(csl, species, t);
    r.total_variance = r.ell_t * r.ell_t + r.csl_variance;
    return r;
}

/// Largest lambda / r_C^2 (m^-2 s^-1) for which CSL diffusion stays below
/// `safety` x ell at recombination time `two_t`.
inline double overlap_bound(double sigma, double two_t, const AtomSpecies& species,
                            double safety = kDefaultSafety) {
    if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("overlap_bound: safety must be in (0, 1]");
    if (!(two_t > 0.0)) throw std::invalid_argument("overlap_bound: two_t must be > 0");
    const double ell = ell_t(sigma, two_t, species);
    const double hbar = kConstants.hbar;
    const double m0 = kConstants.m0;
    return safety * safety * ell * ell * 6.0 * m0 * m0 / (hbar * hbar * two_t * two_t * two_t);
}

/// CSL decoherence kernel F(k, x - y, t) along z:
///   exp[-lambda (m/m0)^2 t (1 - (1/t) int_0^t exp(-(dx - hbar k tau / m)^2 / (4 r_C^2)) dtau)].
///
/// The bracket is integrated as int_0^t (1 - exp(...)) dtau, which is the same
/// quantity without the cancellation; the adaptive rule is seeded with
/// breakpoints around the moving Gaussian's centre at multiples of its width
/// 2 r_C m / (hbar |k|).
inline double fcsl(const CslParams& csl, const AtomSpecies& species, double k, double dx, double t,
                   double rel_tol = 1e-10) {
    if (!(t > 0.0)) throw std::invalid_argument("fcsl: t must be > 0");
    if (csl.lambda == 0.0) return 1.0;
    const double drift = kConstants.hbar * k / species.mass;  // m/s
    const double inv_4rc2 = 1.0 / (4.0 * csl.r_c * csl.r_c);
    auto lost = [&](double tau) {
        const double s = dx - drift * tau;
        return -std::expm1(-s * s * inv_4rc2);
    };
    std::array<double, 9> breaks{};
    std::size_t nb = 0;
    if (drift != 0.0) {
        const double centre = dx / drift;
        const double width = 2.0 * csl.r_c / std::abs(drift);
        for (double m : {0.0, -1.0, 1.0, -3.0, 3.0, -8.0, 8.0}) breaks[nb++] = centre + m * width;
    }
    QuadratureOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = 1e-300;
    const auto r = integrate_adaptive(lost, 0.0, t, std::span<const double>(breaks.data(), nb), opts);
    const double ratio = species.mass_ratio();
    return std::exp(-csl.lambda * ratio * ratio * r.value);
}

/// Exponent of the coherence damping between the packets from 0 to t,
/// lambda (m/m0)^2 t [1 - (sqrt(pi)/2) erf(u)/u] with u = hbar |k1 - k2| t / (2 r_C m).
inline double offdiag_exponent(const CslParams& csl, const WavePacketPair& wp, double t) {
    const double ratio = wp.species.mass_ratio();
    const double u = wp.centre_separation(t) / (2.0 * csl.r_c);
    return csl.lambda * ratio * ratio * t * overlap_loss(u);
}

/// Throws RegimeError unless the packets are separated by at least ten packet
/// widths in both position and wave number, where F can be taken outside the
/// k integral.
inline void check_separated(const WavePacketPair& wp, double t) {
    const double ell = ell_t(wp.sigma, t, wp.species);
    const double dx = wp.centre_separation(t);
    const double dk = wp.wave_number_split();
    if (dx < kSeparationMargin * ell || dk * ell < kSeparationMargin) {
        std::ostringstream msg;
        msg << "offdiag_damping: packets not separated (|x1-x2|/ell = " << dx / ell
            << ", |k1-k2| ell = " << dk * ell << ", need >= " << kSeparationMargin << ")";
        throw RegimeError(msg.str());
    }
}

/// Damping of rho_12 over [0, t].
inline double offdiag_damping(const CslParams& csl, const WavePacketPair& wp, double t) {
    check_separated(wp, t);
    return std::exp(-offdiag_exponent(csl, wp, t));
}

/// Both halves of the interferometer, [0, T] and [T, 2T]: the exponent doubles.
inline double interferometer_damping(const CslParams& csl, const WavePacketPair& wp, double t_sep) {
    check_separated(wp, t_sep);
    return std::exp(-2.0 * offdiag_exponent(csl, wp, t_sep));
}

/// r_C >> |x1 - x2| limit: exp[-lambda hbar^2 (k1-k2)^2 t^3 / (12 r_C^2 m0^2)].
inline double offdiag_large_rc_limit(const CslParams& csl, const WavePacketPair& wp, double t) {
    const double hbar = kConstants.hbar;
    const double m0 = kConstants.m0;
    const double dk = wp.wave_number_split();
    return std::exp(-csl.lambda * hbar * hbar * dk * dk * t * t * t /
                    (12.0 * csl.r_c * csl.r_c * m0 * m0));
}

/// r_C << |x1 - x2| limit: exp[-lambda (m/m0)^2 t].
inline double offdiag_small_rc_limit(const CslParams& csl, const WavePacketPair& wp, double t) {
    const double ratio = wp.species.mass_ratio();
    return std::exp(-csl.lambda * ratio * ratio * t);
}

}  // namespace csl::wavepacket
