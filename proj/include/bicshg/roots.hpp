#pragma once

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "bicshg/errors.hpp"

namespace bicshg::roots {

// Root of f on [lo, hi] given f(lo), f(hi) of opposite sign. Iterates until the
// bracket is narrower than abs_tol or a few ulps, then returns the endpoint
// with the smaller residual.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi, double abs_tol,
                      std::uintmax_t max_iter = 400) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0) == (f_hi > 0)) throw NoBracket("endpoints do not bracket a sign change");
    auto stop = [abs_tol](double a, double b) {
        return std::abs(b - a) <= std::max(abs_tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                                        std::max(std::abs(a), std::abs(b)));
    };
    std::uintmax_t iters = max_iter;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, stop, iters);
    if (iters >= max_iter) throw NoConvergence("bracketed root finder hit the iteration limit");
    if (a == b) return a;
    return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

// Maximum of a unimodal g on [lo, hi] by Brent's golden-section/parabolic
// search; returns (argmax, max).
template <class G>
std::pair<double, double> maximize_unimodal(G&& g, double lo, double hi, int bits = 40) {
    std::uintmax_t iters = 500;
    auto neg = [&g](double x) { return -g(x); };
    const auto [x, fx] = boost::math::tools::brent_find_minima(neg, lo, hi, bits, iters);
    return {x, -fx};
}

}  // namespace bicshg::roots
