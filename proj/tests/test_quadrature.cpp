#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "csl/phase.hpp"
#include "csl/quadrature.hpp"

using namespace csl;

TEST(quadrature, polynomials_and_smooth_functions) {
    const auto r = integrate_adaptive([](double x) { return x * x * x * x * x; }, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0 / 6.0, 1e-15);
    const auto g = integrate_adaptive([](double x) { return std::exp(-x * x); }, -5.0, 5.0);
    EXPECT_NEAR(g.value, std::sqrt(std::numbers::pi) * std::erf(5.0), 1e-14);
    const auto s = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    EXPECT_NEAR(s.value, 2.0, 1e-14);
}

TEST(quadrature, narrow_peak_needs_breakpoint) {
    const double w = 1e-7;
    auto f = [w](double x) { const double z = (x - 0.3) / w; return std::exp(-z * z); };
    const double want = std::sqrt(std::numbers::pi) * w;
    // nodes never sit on an endpoint, so the peak has to be bracketed, not split
    const double breaks[] = {0.3 - 8.0 * w, 0.3 + 8.0 * w};
    const auto r = integrate_adaptive(f, 0.0, 1.0, breaks);
    EXPECT_NEAR(r.value / want, 1.0, 1e-10);
}

TEST(quadrature, reversed_and_empty_ranges) {
    auto f = [](double x) { return x; };
    EXPECT_NEAR(integrate_adaptive(f, 1.0, 0.0).value, -0.5, 1e-15);
    EXPECT_EQ(integrate_adaptive(f, 0.5, 0.5).value, 0.0);
}

TEST(quadrature, budget_exhaustion_throws) {
    QuadratureOptions opts;
    opts.max_intervals = 3;
    opts.rel_tol = 1e-14;
    auto f = [](double x) { return std::sin(1.0 / (x + 1e-3)); };
    EXPECT_THROW(integrate_adaptive(f, 0.0, 1.0, {}, opts), QuadratureError);
}

// phase_variance against a direct time integral of the two-arm noise
// correlation, 2 lambda N^2 int_0^{2T} [1 - exp(-d(t)^2 / (4 r_C^2))] dt with a
// Gauss-Kronrod 61 rule from boost.
TEST(quadrature, phase_variance_time_integral_oracle) {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(gen)); };
    for (int i = 0; i < 50; ++i) {
        const CslParams csl{log_uniform(1e-10, 1e-3), log_uniform(1e-8, 1e-1)};
        const InterferometerConfig ifo{log_uniform(1e-2, 0.5), 0.0, log_uniform(1e-3, 3e-2), 0.0, 9.812};
        const AtomSpecies species{87, 1.44e-25};
        const double dv = ifo.velocity_split();
        const double t = ifo.t_sep;
        auto integrand = [&](double tau) {
            const double d = tau <= t ? dv * tau : dv * (2.0 * t - tau);
            const double x = d / (2.0 * csl.r_c);
            return 2.0 * csl.lambda * species.nucleon_count_sq() * -std::expm1(-x * x);
        };
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        // split where the separation passes a few r_C so each piece is smooth
        const double knee = std::min(t, 8.0 * csl.r_c / dv);
        double want = 0.0;
        for (auto [a, b] : {std::pair{0.0, knee}, {knee, t}, {t, 2.0 * t - knee}, {2.0 * t - knee, 2.0 * t}})
            if (b > a) want += gk::integrate(integrand, a, b, 15, 1e-11);
        EXPECT_NEAR(phase_variance(csl, species, ifo) / want, 1.0, 1e-8)
            << "lambda " << csl.lambda << " r_c " << csl.r_c << " T " << t << " dv " << dv;
    }
}
