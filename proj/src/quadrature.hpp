// quadrature.hpp — absolute-tolerance adaptive Gauss-Kronrod on top of Boost's fixed rules

#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gapengine::detail {

template <class T>
struct QuadResult {
    T value{};
    double error{0.0};
    bool converged{true};
};

// Bisects each interval until the Kronrod error estimate is below its share of abs_tol.
template <class F>
auto adaptive_gk(F&& f, double a, double b, double abs_tol, unsigned max_depth = 40)
    -> QuadResult<decltype(f(a))> {
    using T = decltype(f(a));
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    QuadResult<T> out;
    struct Task {
        double a, b, tol;
        unsigned depth;
    };
    std::vector<Task> stack{{a, b, abs_tol, 0}};
    while (!stack.empty()) {
        Task task = stack.back();
        stack.pop_back();
        double err = 0.0;
        T v = GK::integrate(f, task.a, task.b, 0, 0.0, &err);
        if (err <= task.tol || task.depth >= max_depth || !std::isfinite(err)) {
            if (err > task.tol || !std::isfinite(err)) out.converged = false;
            out.value += v;
            out.error += err;
            continue;
        }
        const double mid = 0.5 * (task.a + task.b);
        stack.push_back({task.a, mid, 0.5 * task.tol, task.depth + 1});
        stack.push_back({mid, task.b, 0.5 * task.tol, task.depth + 1});
    }
    return out;
}

// Sums adaptive_gk over consecutive breakpoints, splitting the tolerance by length.
template <class F>
auto adaptive_gk_pieces(F&& f, std::span<const double> breaks, double abs_tol)
    -> QuadResult<decltype(f(breaks[0]))> {
    using T = decltype(f(breaks[0]));
    QuadResult<T> out;
    const double total = breaks.back() - breaks.front();
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double len = breaks[i + 1] - breaks[i];
        if (len <= 0.0) continue;
        auto piece = adaptive_gk(f, breaks[i], breaks[i + 1], abs_tol * len / total);
        out.value += piece.value;
        out.error += piece.error;
        out.converged = out.converged && piece.converged;
    }
    return out;
}

} // namespace gapengine::detail
