#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "csl/errors.hpp"

namespace csl {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

namespace detail {

struct GkSegment {
    double a, b, value, error;
    bool operator<(const GkSegment& other) const { return error < other.error; }
};

// 15-point Kronrod rule with embedded 7-point Gauss rule.
template <class F>
GkSegment gauss_kronrod_15(const F& f, double a, double b) {
    static constexpr std::array<double, 8> xk{
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk{
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg{
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = wk[7] * fc;
    double gauss = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xk[j];
        const double pair = f(centre - dx) + f(centre + dx);
        kronrod += wk[j] * pair;
        if (j % 2 == 1) gauss += wg[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
///
/// `breakpoints` (any order, values outside (a, b) ignored) seed the initial
/// partition; use them to pin narrow features such as a sharp peak. The
/// interval with the largest error estimate is bisected until the summed
/// estimate drops under max(abs_tol, rel_tol * |I|).
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b,
                                    std::span<const double> breakpoints = {},
                                    const QuadratureOptions& opts = {}) {
    if (a == b) return {};
    if (a > b) {
        auto r = integrate_adaptive(f, b, a, breakpoints, opts);
        r.value = -r.value;
        return r;
    }
    std::vector<double> edges{a};
    for (double p : breakpoints)
        if (p > a && p < b) edges.push_back(p);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<detail::GkSegment> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto seg = detail::gauss_kronrod_15(f, edges[i], edges[i + 1]);
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
    }
    int intervals = static_cast<int>(heap.size());
    auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

    while (total_err > target()) {
        if (intervals >= opts.max_intervals) {
            throw QuadratureError("adaptive quadrature: tolerance not met after " +
                                  std::to_string(intervals) + " intervals (error estimate " +
                                  std::to_string(total_err) + ")");
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureError("adaptive quadrature: interval cannot be subdivided further");
        }
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed the drift of the incremental updates.
    double value = 0.0;
    double err = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {value, err, intervals};
}

}  // namespace csl
