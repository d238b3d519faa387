// entanglement.hpp — Bell-family initial states, the induced two-qubit map
// for identical independent reservoirs, concurrence, and sudden-death
// detection on concurrence series.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sqdyn/propagator.hpp"

namespace sqdyn {

// Two-qubit basis order: {|11>, |10>, |01>, |00>} (both excited first),
// consistent with the single-qubit excited-state-first convention.
using TwoQubitDensity = Eigen::Matrix4cd;

enum class BellFamily { Phi, Psi };

// One-parameter Bell-like pure state: Phi = beta|01> + eta|10>,
// Psi = beta|00> + eta|11>, with eta = sqrt(1 - beta^2) e^{i phi}.
struct BellFamilyState {
    BellFamily family{BellFamily::Phi};
    double beta{0.70710678118654752440};
    double phi{0.0};
};

inline TwoQubitDensity initial_state(const BellFamilyState& b) {
    if (!(b.beta > 0.0 && b.beta < 1.0))
        throw std::invalid_argument("beta must lie strictly between 0 and 1");
    const cplx eta = std::sqrt(1.0 - b.beta * b.beta) * std::exp(cplx(0.0, b.phi));
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    if (b.family == BellFamily::Phi) {
        v(2) = b.beta;  // |01>
        v(1) = eta;     // |10>
    } else {
        v(3) = b.beta;  // |00>
        v(0) = eta;     // |11>
    }
    return v * v.adjoint();
}

// Evolves a two-qubit state when each qubit couples to its own identical
// reservoir: the joint map is the tensor square of the one-qubit map,
// applied via the index-reshuffle that turns it into two matrix products.
inline TwoQubitDensity joint_density(const SingleQubitMap& M, const TwoQubitDensity& rho0) {
    const Eigen::Matrix4cd S = std::exp(-M.gamma_k) * action_matrix(M);
    TwoQubitDensity R;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    R(2 * a + c, 2 * b + d) = rho0(2 * a + b, 2 * c + d);
    const TwoQubitDensity R2 = S * R * S.transpose();
    TwoQubitDensity out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    out(2 * a + b, 2 * c + d) = R2(2 * a + c, 2 * b + d);
    return out;
}

struct NonXState : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Closed-form concurrence for X-shaped states (nonzero entries only on the
// diagonal and anti-diagonal). Entries off that pattern beyond 1e-8 reject
// the input.
inline double concurrence_x(const TwoQubitDensity& rho) {
    static constexpr int off_x[8][2] = {{0, 1}, {0, 2}, {1, 0}, {1, 3},
                                        {2, 0}, {2, 3}, {3, 1}, {3, 2}};
    for (const auto& ij : off_x)
        if (std::abs(rho(ij[0], ij[1])) > 1e-8)
            throw NonXState("density matrix is not X-shaped");
    const auto cross = [&](int i, int j) {
        return std::sqrt(std::max(0.0, (rho(i, j) * rho(j, i)).real()));
    };
    const auto diag = [&](int i, int j) {
        return std::sqrt(std::max(0.0, (rho(i, i) * rho(j, j)).real()));
    };
    const double c1 = 2.0 * (cross(1, 2) - diag(0, 3));
    const double c2 = 2.0 * (cross(0, 3) - diag(1, 2));
    return std::max({0.0, c1, c2});
}

struct Concurrence {
    double value;
    bool validity_warning;  // spectrum of the spin-flipped product was not
                            // nonnegative-real to tolerance
};

// Concurrence of an arbitrary two-qubit state from the spectrum of
// rho * (sy ⊗ sy) * conj(rho) * (sy ⊗ sy).
inline Concurrence concurrence_full(const TwoQubitDensity& rho) {
    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Eigen::Matrix4cd prod = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(prod, false);
    bool warn = false;
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) {
        const cplx mu = es.eigenvalues()(i);
        if (mu.real() < -1e-8 || std::abs(mu.imag()) > 1e-8) warn = true;
        lam[i] = std::sqrt(std::max(0.0, mu.real()));
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return {std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]), warn};
}

struct EsdResult {
    std::optional<double> esd_time;  // first confirmed downward crossing
    int revival_count{0};
    // [death, revival] pairs; an interval still open at the end of the grid
    // is closed with the final grid time.
    std::vector<std::pair<double, double>> dark_intervals;
};

// Scans a concurrence series for sudden death and revival. A crossing of
// eps_zero counts only when the series stays on the new side for `window`
// consecutive grid points, so single-point noise and a short trailing dip
// are not events. Crossing times are interpolated linearly between the two
// bracketing grid points. A series that starts below eps_zero opens a dark
// interval at the first grid time without recording a death event.
inline EsdResult detect_esd(const std::vector<double>& t, const std::vector<double>& c,
                            double eps_zero = 1e-6, int window = 5) {
    if (t.size() != c.size())
        throw std::invalid_argument("time and concurrence series differ in length");
    const int n = static_cast<int>(t.size());
    if (n < 2 * window)
        throw std::invalid_argument("series too short for the confirmation window");

    EsdResult res;
    bool alive = c[0] >= eps_zero;
    double open_death = t[0];
    const auto sustained = [&](int i, bool below) {
        if (i + window > n) return false;
        for (int k = i; k < i + window; ++k)
            if ((c[k] < eps_zero) != below) return false;
        return true;
    };
    const auto interp = [&](int i) {
        const double c0 = c[i - 1], c1 = c[i];
        if (c0 == c1) return t[i];
        return t[i - 1] + (eps_zero - c0) * (t[i] - t[i - 1]) / (c1 - c0);
    };

    for (int i = 1; i < n; ++i) {
        if (alive && c[i] < eps_zero && sustained(i, true)) {
            const double td = interp(i);
            if (!res.esd_time) res.esd_time = td;
            open_death = td;
            alive = false;
        } else if (!alive && c[i] >= eps_zero && sustained(i, false)) {
            const double tr = interp(i);
            ++res.revival_count;
            res.dark_intervals.emplace_back(open_death, tr);
            alive = true;
        }
    }
    if (!alive) res.dark_intervals.emplace_back(open_death, t[n - 1]);
    return res;
}

}  // namespace sqdyn
