// propagator.hpp — algebraically disentangled single-qubit propagator: the
// auxiliary Riccati/quadrature system for the group parameters and the map
// elements built from them.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "sqdyn/ode.hpp"
#include "sqdyn/reservoir.hpp"

namespace sqdyn {

// Group parameters of the factored propagator at one time. The j-triple
// drives the coherence block, the k-triple the population block; gamma_k is
// the accumulated scalar decay folded out of both blocks.
struct RiccatiState {
    double t;
    cplx j_plus, j_zero, j_minus;
    double k_plus, k_zero, k_minus;
    double gamma_k;
};

// Elements of the one-qubit map at one time, prefactor exp(-gamma_k) not yet
// applied. l, m, n, p act on populations; x, y, q, r_map on coherences.
struct SingleQubitMap {
    double t;
    double l, m, n, p;
    cplx x, y, q, r_map;
    double gamma_k;
};

struct RiccatiRun {
    std::vector<RiccatiState> states;   // one per grid time, in order, until failure
    std::optional<double> singular_t;   // time of finite-time blow-up, if any
};

// Integrates the auxiliary system over the grid. Internally the two "zero"
// components carry a +2*gamma_k shift so their real parts stay bounded in
// decaying regimes; the emitted states are the physical (unshifted) values.
// On finite-time blow-up the run stops and reports the failure time instead
// of throwing, keeping the states already produced.
inline RiccatiRun integrate_riccati_run(const ReservoirParams& p,
                                        const std::vector<double>& grid,
                                        const OdeOptions& opt = {}) {
    using Vec6 = Eigen::Matrix<cplx, 6, 1>;
    RiccatiRun run;
    run.states.reserve(grid.size());

    const auto rhs = [&p](double t, const Vec6& y) -> Vec6 {
        const auto g = generator_coeffs(p, t);
        const double gk = accumulated_decay(p, t).gamma_k;
        const cplx jp = y(0), j0s = y(1);
        const cplx kp = y(3), k0s = y(4);
        Vec6 dy;
        dy(0) = g.eps_plus - g.eps_minus * jp * jp + g.eps0 * jp;
        dy(1) = g.eps0 - 2.0 * g.eps_minus * jp + 2.0 * g.Gamma;
        dy(2) = g.eps_minus * std::exp(j0s - 2.0 * gk);
        dy(3) = g.nu_plus - g.nu_minus * kp * kp + g.nu0 * kp;
        dy(4) = g.nu0 - 2.0 * g.nu_minus * kp + 2.0 * g.Gamma;
        dy(5) = g.nu_minus * std::exp(k0s - 2.0 * gk);
        return dy;
    };

    const auto emit = [&](double t, const Vec6& y) {
        const double gk = accumulated_decay(p, t).gamma_k;
        RiccatiState s;
        s.t = t;
        s.j_plus = y(0);
        s.j_zero = y(1) - 2.0 * gk;
        s.j_minus = y(2);
        s.k_plus = y(3).real();
        s.k_zero = (y(4) - cplx(2.0 * gk)).real();
        s.k_minus = y(5).real();
        s.gamma_k = gk;
        run.states.push_back(s);
    };

    try {
        integrate_dopri5<6>(rhs, 0.0, Vec6::Zero(), grid, opt, emit);
    } catch (const PropagatorSingularity& e) {
        run.singular_t = e.t_star;
    }
    return run;
}

inline std::vector<RiccatiState> integrate_riccati(const ReservoirParams& p,
                                                   const std::vector<double>& grid,
                                                   const OdeOptions& opt = {}) {
    auto run = integrate_riccati_run(p, grid, opt);
    if (run.singular_t) throw PropagatorSingularity(*run.singular_t);
    return std::move(run.states);
}

inline SingleQubitMap assemble_map(const RiccatiState& s) {
    const double ekh = std::exp(0.5 * s.k_zero);
    const double ekhi = std::exp(-0.5 * s.k_zero);
    const cplx ejh = std::exp(0.5 * s.j_zero);
    const cplx ejhi = std::exp(-0.5 * s.j_zero);
    SingleQubitMap M;
    M.t = s.t;
    M.l = ekh + ekhi * s.k_plus * s.k_minus;
    M.m = ekhi * s.k_plus;
    M.n = ekhi;
    M.p = ekhi * s.k_minus;
    M.x = ejh + ejhi * s.j_plus * s.j_minus;
    M.y = ejhi * s.j_plus;
    M.q = ejhi;
    M.r_map = ejhi * s.j_minus;
    M.gamma_k = s.gamma_k;
    const bool finite = std::isfinite(M.l) && std::isfinite(M.m) && std::isfinite(M.n) &&
                        std::isfinite(M.p) && std::isfinite(std::abs(M.x)) &&
                        std::isfinite(std::abs(M.y)) && std::isfinite(std::abs(M.q)) &&
                        std::isfinite(std::abs(M.r_map));
    if (!finite) throw MapOverflow(s.t);
    return M;
}

// The map as a matrix on vectorized densities, prefactor exp(-gamma_k) not
// applied. Populations and coherences live in decoupled 2x2 blocks.
inline Eigen::Matrix4cd action_matrix(const SingleQubitMap& M) {
    Eigen::Matrix4cd A = Eigen::Matrix4cd::Zero();
    A(0, 0) = M.l;
    A(0, 3) = M.m;
    A(1, 1) = M.x;
    A(1, 2) = M.y;
    A(2, 1) = M.r_map;
    A(2, 2) = M.q;
    A(3, 0) = M.p;
    A(3, 3) = M.n;
    return A;
}

// Applies the map to an initial density matrix (basis: excited state first).
inline Eigen::Matrix2cd evolve_qubit(const SingleQubitMap& M, const Eigen::Matrix2cd& rho0) {
    const double pf = std::exp(-M.gamma_k);
    Eigen::Matrix2cd out;
    out(0, 0) = pf * (M.l * rho0(0, 0) + M.m * rho0(1, 1));
    out(0, 1) = pf * (M.x * rho0(0, 1) + M.y * rho0(1, 0));
    out(1, 0) = pf * (M.q * rho0(1, 0) + M.r_map * rho0(0, 1));
    out(1, 1) = pf * (M.p * rho0(0, 0) + M.n * rho0(1, 1));
    return out;
}

inline std::vector<SingleQubitMap> map_series(const ReservoirParams& p,
                                              const std::vector<double>& grid,
                                              const OdeOptions& opt = {}) {
    std::vector<SingleQubitMap> maps;
    maps.reserve(grid.size());
    for (const auto& s : integrate_riccati(p, grid, opt)) maps.push_back(assemble_map(s));
    return maps;
}

}  // namespace sqdyn
