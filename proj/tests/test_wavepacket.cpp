#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "csl/phase.hpp"
#include "csl/wavepacket.hpp"

using namespace csl;
using namespace csl::wavepacket;

namespace {

const AtomSpecies rb{};

double hbar() { return kConstants.hbar; }
double m0() { return kConstants.m0; }

// int_0^t exp(-(dx - v tau)^2 / (4 r^2)) dtau in closed form
double gaussian_time_integral(double dx, double v, double r, double t) {
    if (v == 0.0) return t * std::exp(-dx * dx / (4.0 * r * r));
    return std::sqrt(std::numbers::pi) * r / v * (std::erf(dx / (2.0 * r)) - std::erf((dx - v * t) / (2.0 * r)));
}

}  // namespace

TEST(spread, reference_widths) {
    EXPECT_EQ(ell_t(1e-6, 0.0, rb), 1e-6);
    EXPECT_NEAR(ell_t(1e-6, 0.19, rb) / 7e-5, 1.0, 0.05);
    EXPECT_NEAR(ell_t(1e-6, 0.52, rb) / 1.9e-4, 1.0, 0.05);
    EXPECT_NEAR(ell_t(1e-6, 0.19, rb), 6.957963264245195e-05, 1e-18);
    EXPECT_NEAR(ell_t(1e-6, 0.52, rb), 1.904114262026095e-04, 1e-17);
}

TEST(spread, report_is_additive) {
    const CslParams csl{1e-8, 1e-7};
    const auto r = spread_report(csl, rb, 1e-6, 0.3);
    EXPECT_GE(r.ell_t, 1e-6);
    EXPECT_EQ(r.total_variance, r.ell_t * r.ell_t + r.csl_variance);
    // |sigma_t|^2 = sigma ell_t
    EXPECT_NEAR(r.sigma_t_mag * r.sigma_t_mag / (1e-6 * r.ell_t), 1.0, 1e-14);
    const auto zero = spread_report(csl, rb, 1e-6, 0.0);
    EXPECT_EQ(zero.ell_t, 1e-6);
    EXPECT_EQ(zero.csl_variance, 0.0);
}

TEST(csl_diffusion, scaling_and_inverse_of_bound) {
    const CslParams csl{3e-8, 1e-7};
    EXPECT_EQ(csl_position_variance(csl, rb, 0.0), 0.0);
    EXPECT_NEAR(csl_position_variance(csl, rb, 0.4) / csl_position_variance(csl, rb, 0.2), 8.0, 1e-13);
    // at lambda / r_C^2 = 3.9e6 the rms diffusion is ~ 0.1 ell_2T
    const CslParams at_bound{3.9e6 * 1e-14, 1e-7};
    const double rms = std::sqrt(csl_position_variance(at_bound, rb, 0.52));
    EXPECT_NEAR(rms / (0.1 * ell_t(1e-6, 0.52, rb)), 1.0, 0.01);
    EXPECT_NEAR(rms / 1.9e-5, 1.0, 0.02);
    // exactly 0.1 ell at the computed bound
    const CslParams exact{overlap_bound(1e-6, 0.52, rb) * 1e-14, 1e-7};
    EXPECT_NEAR(std::sqrt(csl_position_variance(exact, rb, 0.52)) / ell_t(1e-6, 0.52, rb), 0.1, 1e-15);
}

TEST(heating, values) {
    const CslParams grw{1e-16, 1e-7};
    EXPECT_EQ(heating_energy(grw, rb, 0.0), 0.0);
    EXPECT_NEAR(heating_energy(grw, rb, 1.0) / 4.355899811781585e-42, 1.0, 1e-14);
    // independent re-derivation: m/2 d<v^2>/dt with <dz^2> = lambda hbar^2 t^3 / (6 m0^2 r^2)
    // per axis gives (3 axes) 3 m hbar^2 lambda / (4 m0^2 r^2) per unit time
    const double per_second = 3.0 * 1.44e-25 * hbar() * hbar() * 1e-16 / (4.0 * m0() * m0() * 1e-14);
    EXPECT_NEAR(heating_energy(grw, rb, 1.0) / per_second, 1.0, 1e-15);
    EXPECT_NEAR(heating_energy(grw, rb, 2.0), 2.0 * heating_energy(grw, rb, 1.0), 1e-57);
}

TEST(overlap_bound, reference_value_and_scalings) {
    const double b = overlap_bound(1e-6, 0.52, rb, 0.1);
    EXPECT_NEAR(b / 3.9e6, 1.0, 0.05);
    EXPECT_NEAR(b, 3835951.475239221, 1e-6);
    EXPECT_NEAR(overlap_bound(1e-6, 0.52, rb, 0.2) / b, 4.0, 1e-14);
    EXPECT_NEAR(overlap_bound(1e-6, 0.52, rb, 1.0) / b, 100.0, 1e-12);
    const double half = overlap_bound(1e-6, 0.26, rb, 0.1);
    const double l_ratio = ell_t(1e-6, 0.26, rb) / ell_t(1e-6, 0.52, rb);
    EXPECT_NEAR(half / b, 8.0 * l_ratio * l_ratio, 1e-12);
    EXPECT_NEAR(half / b, 2.0, 5e-4);  // far field: ell nearly linear, sigma_t ~ 95 sigma here
    EXPECT_THROW(overlap_bound(1e-6, 0.52, rb, 0.0), std::invalid_argument);
    EXPECT_THROW(overlap_bound(1e-6, 0.52, rb, 1.5), std::invalid_argument);
}

TEST(fcsl, trivial_cases) {
    const CslParams csl{1e-2, 1e-7};
    EXPECT_EQ(fcsl(csl, rb, 0.0, 0.0, 0.3), 1.0);
    EXPECT_EQ(fcsl({0.0, 1e-7}, rb, 1e7, 1e-4, 0.3), 1.0);
    EXPECT_THROW(fcsl(csl, rb, 1e7, 0.0, 0.0), std::invalid_argument);
}

TEST(fcsl, closed_form_oracle) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(gen)); };
    for (int i = 0; i < 300; ++i) {
        const CslParams csl{log_uniform(1e-10, 1e-4), log_uniform(1e-9, 1e-2)};
        const double k = log_uniform(1e4, 1e8) * (unit(gen) < 0.5 ? -1.0 : 1.0);
        const double t = log_uniform(1e-3, 1.0);
        const double v = hbar() * k / rb.mass;
        // dx = 0 half the time, otherwise inside the swept range
        const double dx = unit(gen) < 0.5 ? 0.0 : v * t * unit(gen);
        const double ratio = rb.mass_ratio();
        const double lost = t - gaussian_time_integral(dx, v, csl.r_c, t);
        const double want_exp = csl.lambda * ratio * ratio * lost;
        const double got = fcsl(csl, rb, k, dx, t);
        // compare the losses 1 - F; rounding of F itself limits tiny exponents
        const double want_loss = -std::expm1(-want_exp);
        EXPECT_NEAR(1.0 - got, want_loss, 1e-9 * want_loss + 4e-16) << "i " << i;
        EXPECT_GT(got, 0.0);
        EXPECT_LE(got, 1.0);
    }
}

TEST(fcsl, monotone_in_rate_and_time) {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const CslParams csl{1e-6 * (1.0 + 100.0 * unit(gen)), 1e-7 * (1.0 + 100.0 * unit(gen))};
        const double k = 1e7 * unit(gen);
        const double dx = 1e-5 * unit(gen);
        const double t = 0.05 + 0.5 * unit(gen);
        const double f = fcsl(csl, rb, k, dx, t);
        EXPECT_LE(fcsl({csl.lambda * 2.0, csl.r_c}, rb, k, dx, t), f);
        EXPECT_LE(fcsl(csl, rb, k, dx, t * 1.5), f * (1.0 + 1e-12));
    }
}

TEST(fcsl, diagonal_neutrality) {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double sigma = 1e-6;
        const double t = 0.01 + 0.5 * unit(gen);
        const double ell = ell_t(sigma, t, rb);
        const CslParams csl{1e-8 * std::pow(1e6, unit(gen)), ell * (100.0 + 1e4 * unit(gen))};
        const double dx = ell * (2.0 * unit(gen) - 1.0);
        const double k = (2.0 * unit(gen) - 1.0) / ell;
        const double ratio = rb.mass_ratio();
        const double reach = ell + hbar() * t / (rb.mass * ell);
        const double bound = 2.0 * csl.lambda * ratio * ratio * t * reach * reach / (4.0 * csl.r_c * csl.r_c);
        EXPECT_LE(1.0 - fcsl(csl, rb, k, dx, t), bound);
    }
}

TEST(offdiag, exponent_matches_fcsl_at_packet_centres) {
    const auto wp = WavePacketPair::from_geometry(rb, ArmGeometry{}, 1e-6);
    const CslParams csl{5.6e-5, 1e-6};
    const double t = 0.26;
    const double f = fcsl(csl, rb, wp.wave_number_split(), 0.0, t);
    EXPECT_NEAR(-std::log(f) / offdiag_exponent(csl, wp, t), 1.0, 1e-9);
}

TEST(offdiag, regime_limits) {
    const auto wp = WavePacketPair::from_geometry(rb, ArmGeometry{}, 1e-6);
    const double t = 0.26;
    const double sep = wp.centre_separation(t);
    // r_C far above the separation
    const CslParams large{1e-3, 1e3 * sep};
    EXPECT_NEAR(offdiag_damping(large, wp, t) / offdiag_large_rc_limit(large, wp, t), 1.0, 1e-4);
    // r_C far below it
    const CslParams small{1e-6, 1e-4 * sep};
    EXPECT_NEAR(offdiag_damping(small, wp, t) / offdiag_small_rc_limit(small, wp, t), 1.0, 1e-4);
}

TEST(offdiag, regime_sandwich) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const ArmGeometry geo{0.0, 5e-3 + 3e-2 * unit(gen), 9.812};
        const auto wp = WavePacketPair::from_geometry(rb, geo, 1e-6);
        const double t = 0.05 + 0.5 * unit(gen);
        const CslParams csl{1e-6 * std::pow(1e4, unit(gen)), 1e-9 * std::pow(1e8, unit(gen))};
        const double d = offdiag_damping(csl, wp, t);
        EXPECT_LE(offdiag_small_rc_limit(csl, wp, t), d * (1.0 + 1e-14));
        EXPECT_LE(d, 1.0);
        // the leading Taylor exponent overestimates the loss everywhere
        EXPECT_LE(offdiag_large_rc_limit(csl, wp, t), d * (1.0 + 1e-14));
    }
}

TEST(offdiag, separation_precondition) {
    const CslParams csl{1e-6, 1e-7};
    const auto slow = WavePacketPair::from_geometry(rb, ArmGeometry{0.0, 1e-4, 9.812}, 1e-6);
    EXPECT_THROW(offdiag_damping(csl, slow, 0.26), RegimeError);
    EXPECT_THROW(interferometer_damping(csl, slow, 0.26), RegimeError);
    const auto wp = WavePacketPair::from_geometry(rb, ArmGeometry{}, 1e-6);
    EXPECT_NO_THROW(offdiag_damping(csl, wp, 0.26));
    // at the experimental parameters the margin is about 30
    EXPECT_GT(wp.centre_separation(0.26) / ell_t(1e-6, 0.26, rb), 25.0);
}

TEST(offdiag, squared_damping_equals_contrast) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto species = AtomSpecies::with_unit_nucleon_mass(80 + static_cast<std::int64_t>(200 * unit(gen)));
        const double dv = 5e-3 + 3e-2 * unit(gen);
        const double t = 0.02 + 0.5 * unit(gen);
        const double u = 1e-3 * std::pow(1e7, unit(gen));
        const CslParams csl{1e-7 * std::pow(1e4, unit(gen)), dv * t / (2.0 * u)};
        const InterferometerConfig ifo{t, 0.0, dv, 0.0, 9.812};
        const auto wp = WavePacketPair::from_geometry(species, ifo.geometry(), 1e-6);
        const double d = offdiag_damping(csl, wp, t);
        EXPECT_NEAR(d * d / contrast(csl, species, ifo), 1.0, 1e-10);
        EXPECT_NEAR(interferometer_damping(csl, wp, t) / contrast(csl, species, ifo), 1.0, 1e-10);
    }
}

TEST(offdiag, rubidium_mass_ratio_mismatch) {
    const auto wp = WavePacketPair::from_geometry(rb, ArmGeometry{}, 1e-6);
    const CslParams csl{5.6e-5, 1e-7};
    const InterferometerConfig ifo{0.26, 0.0, 11e-3, 0.0, 9.812};
    const double ratio = -std::log(interferometer_damping(csl, wp, 0.26)) / phase_variance(csl, rb, ifo) * 2.0;
    EXPECT_NEAR(ratio, rb.mass_ratio() * rb.mass_ratio() / (87.0 * 87.0), 1e-12);
    EXPECT_NEAR(ratio, 0.9936, 1e-4);
}
