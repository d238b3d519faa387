// ode.hpp — adaptive Dormand–Prince 5(4) integrator for small complex ODE
// systems, with embedded error control and structured blow-up reporting.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqdyn {

using cplx = std::complex<double>;

// Finite-time blow-up (step size underflow) or non-finite right-hand side.
struct PropagatorSingularity : std::runtime_error {
    double t_star;
    explicit PropagatorSingularity(double t)
        : std::runtime_error("propagator singularity at t=" + std::to_string(t)),
          t_star(t) {}
};

// Overflow while forming map elements from the disentangling functions.
struct MapOverflow : std::runtime_error {
    double t;
    explicit MapOverflow(double t_)
        : std::runtime_error("map overflow at t=" + std::to_string(t_)), t(t_) {}
};

struct OdeOptions {
    double rel_tol{1e-9};
    double abs_tol{1e-12};
};

namespace detail {

// Dormand–Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights coincide with the last tableau row (FSAL).
inline constexpr double dp_e[7] = {71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace detail

// Integrates dy/dt = rhs(t, y) from t0 through every grid time, invoking
// emit(t, y) exactly at each grid point (grid strictly ascending, >= t0).
// Error per step is controlled against abs_tol + rel_tol * |y| component-wise.
// Step-size underflow or a persistently non-finite right-hand side raises
// PropagatorSingularity carrying the failure time.
template <int N, class Rhs, class Emit>
void integrate_dopri5(Rhs&& rhs, double t0, Eigen::Matrix<cplx, N, 1> y,
                      const std::vector<double>& grid, const OdeOptions& opt,
                      Emit&& emit) {
    using Vec = Eigen::Matrix<cplx, N, 1>;
    if (grid.empty()) return;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1]))
            throw std::invalid_argument("time grid must be strictly ascending");
    if (grid.front() < t0)
        throw std::invalid_argument("time grid must start at or after t0");

    const double rtol = opt.rel_tol;
    const double atol = opt.abs_tol;
    const double t_end = grid.back();

    auto scaled_rms = [&](const Vec& v, const Vec& ya, const Vec& yb) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = atol + rtol * std::max(std::abs(ya(i)), std::abs(yb(i)));
            const double e = std::abs(v(i)) / sc;
            acc += e * e;
        }
        return std::sqrt(acc / N);
    };

    double t = t0;
    std::size_t gi = 0;
    while (gi < grid.size() && grid[gi] == t) {
        emit(t, y);
        ++gi;
    }
    if (gi == grid.size()) return;

    Vec k[7];
    k[0] = rhs(t, y);

    // Initial step size: standard two-estimate heuristic on the scaled norms.
    double h;
    {
        const double d0 = scaled_rms(y, y, y);
        const double d1 = scaled_rms(k[0], y, y);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_end - t);
        Vec y1 = y + h0 * k[0];
        Vec f1 = rhs(t + h0, y1);
        const double d2 = scaled_rms(f1 - k[0], y, y) / h0;
        double h1;
        if (std::max(d1, d2) <= 1e-15)
            h1 = std::max(1e-6, h0 * 1e-3);
        else
            h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
        h = std::min({100.0 * h0, h1, t_end - t});
        if (!(h > 0.0) || !std::isfinite(h)) h = 1e-6;
    }

    const double h_floor_scale = 64.0 * std::numeric_limits<double>::epsilon();
    while (gi < grid.size()) {
        const double tg = grid[gi];
        const bool capped = t + h >= tg;
        const double ha = capped ? tg - t : h;  // attempted step; h keeps the natural size
        if (ha < h_floor_scale * std::max(1.0, std::abs(t)))
            throw PropagatorSingularity(t);

        Vec ys;
        for (int s = 1; s < 7; ++s) {
            ys = y;
            for (int j = 0; j < s; ++j) ys += (ha * detail::dp_a[s][j]) * k[j];
            k[s] = rhs(t + detail::dp_c[s] * ha, ys);
        }
        // The s = 6 stage point is the 5th-order solution itself (FSAL).
        const Vec y5 = ys;

        Vec err_vec = Vec::Zero();
        for (int j = 0; j < 7; ++j) err_vec += (ha * detail::dp_e[j]) * k[j];

        double err = scaled_rms(err_vec, y, y5);
        bool finite = std::isfinite(err);
        for (int i = 0; finite && i < N; ++i)
            if (!std::isfinite(std::abs(y5(i)))) finite = false;

        if (finite && err <= 1.0) {
            t = capped ? tg : t + ha;
            y = y5;
            k[0] = k[6];
            while (gi < grid.size() && grid[gi] == t) {
                emit(t, y);
                ++gi;
            }
            if (!capped) {
                const double grow = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
                h = ha * std::clamp(grow, 1.0, 5.0);
            }
        } else {
            const double shrink = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h = ha * std::min(shrink, 0.9);
        }
    }
}

}  // namespace sqdyn
