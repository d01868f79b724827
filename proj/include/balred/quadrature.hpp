#pragma once

// Adaptive composite Gauss-Legendre quadrature for scalar and matrix-valued
// integrands. Panels are doubled until two successive estimates agree to the
// requested relative tolerance.

#include "balred/linalg.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>

namespace balred::quad {

inline constexpr unsigned kGaussPoints = 15;

struct Options {
    double rel_tol = 1e-10;
    /// Successive estimates closer than this are accepted regardless of scale.
    double abs_tol = 0.0;
    std::size_t initial_panels = 1;
    std::size_t max_panels = std::size_t{1} << 14;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const Matrix& m) { return m.norm(); }

template <class R>
R zero_like(const R& sample) {
    if constexpr (std::is_same_v<R, double>) {
        return 0.0;
    } else {
        return R::Zero(sample.rows(), sample.cols());
    }
}

// Gauss rule on n equal panels of [a, b].
template <class F>
auto composite(F& f, double a, double b, std::size_t panels) {
    using Rule = boost::math::quadrature::gauss<double, kGaussPoints>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const double h = (b - a) / static_cast<double>(panels);
    using R = std::decay_t<decltype(f(a))>;
    R total{};
    bool first = true;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h;
        const double half = 0.5 * h;
        // Boost stores the non-negative half of the symmetric rule; for odd
        // point counts the first abscissa is the centre.
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i == 0 && (kGaussPoints % 2 == 1)) {
                R v = f(mid) * (w[0] * half);
                if (first) {
                    total = v;
                    first = false;
                } else {
                    total += v;
                }
                continue;
            }
            R v = (f(mid - half * x[i]) + f(mid + half * x[i])) * (w[i] * half);
            if (first) {
                total = v;
                first = false;
            } else {
                total += v;
            }
        }
    }
    return total;
}

}  // namespace detail

/// Integral of f over [a, b]. `f` returns double or Matrix. Throws
/// std::runtime_error when the panel budget is exhausted.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opts = {}) {
    using R = std::decay_t<decltype(f(a))>;
    if (b == a) {
        return detail::zero_like<R>(f(a));
    }
    std::size_t panels = opts.initial_panels;
    R prev = detail::composite(f, a, b, panels);
    while (panels < opts.max_panels) {
        panels *= 2;
        R next = detail::composite(f, a, b, panels);
        const double scale = detail::magnitude(next);
        const double change = detail::magnitude(R(next - prev));
        if (change <= opts.rel_tol * scale || change <= opts.abs_tol ||
            (scale == 0.0 && change == 0.0)) {
            return next;
        }
        prev = std::move(next);
    }
    throw std::runtime_error("adaptive quadrature did not converge");
}

/// Integral of a non-negative, eventually decaying scalar integrand over
/// [0, infinity), summed window by window. Integration stops after the first
/// window whose endpoint values both fall below `decay_tol` times the largest
/// value seen so far.
template <class F>
double integrate_to_decay(F&& f, double window, double decay_tol = 1e-14,
                          const Options& opts = {}, std::size_t max_windows = 100000) {
    double total = 0.0;
    double peak = std::abs(f(0.0));
    for (std::size_t k = 0; k < max_windows; ++k) {
        const double lo = window * static_cast<double>(k);
        const double hi = lo + window;
        const double mid_val = std::abs(f(0.5 * (lo + hi)));
        const double hi_val = std::abs(f(hi));
        peak = std::max({peak, mid_val, hi_val});
        total += integrate(f, lo, hi, opts);
        if (std::max(mid_val, hi_val) < decay_tol * peak || peak == 0.0) return total;
    }
    throw std::runtime_error("integrand did not decay over the integration window budget");
}

}  // namespace balred::quad
