// liouville.hpp — single-qubit generator in vectorized form and the direct
// master-equation integration used to cross-check the algebraic propagator.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sqdyn/ode.hpp"
#include "sqdyn/reservoir.hpp"

namespace sqdyn {

// Density-matrix vectorization order: (rho_ee, rho_eg, rho_ge, rho_gg) with
// the excited state first in the 2x2 basis.
inline Eigen::Vector4cd vectorize(const Eigen::Matrix2cd& rho) {
    Eigen::Vector4cd v;
    v << rho(0, 0), rho(0, 1), rho(1, 0), rho(1, 1);
    return v;
}

inline Eigen::Matrix2cd devectorize(const Eigen::Vector4cd& v) {
    Eigen::Matrix2cd rho;
    rho << v(0), v(1), v(2), v(3);
    return rho;
}

// The six sandwich/commutator superoperators generating the dynamics, as
// 4x4 matrices acting on vectorized densities.
struct Superoperators {
    Eigen::Matrix4cd J0, Jp, Jm, K0, Kp, Km;
};

inline Superoperators superoperators() {
    using M2 = Eigen::Matrix2cd;
    M2 sp = M2::Zero();
    sp(0, 1) = 1.0;  // raising operator
    M2 sm = M2::Zero();
    sm(1, 0) = 1.0;  // lowering operator
    const M2 pe = sp * sm;  // excited-state projector

    Superoperators S;
    const auto build = [](auto&& act, Eigen::Matrix4cd& out) {
        for (int c = 0; c < 4; ++c) {
            M2 e = M2::Zero();
            e(c / 2, c % 2) = 1.0;
            out.col(c) = vectorize(act(e));
        }
    };
    build([&](const M2& r) -> M2 { return 0.5 * (pe * r - r * pe); }, S.J0);
    build([&](const M2& r) -> M2 { return sp * r * sp; }, S.Jp);
    build([&](const M2& r) -> M2 { return sm * r * sm; }, S.Jm);
    build([&](const M2& r) -> M2 { return 0.5 * (pe * r + r * pe) - 0.5 * r; }, S.K0);
    build([&](const M2& r) -> M2 { return sp * r * sm; }, S.Kp);
    build([&](const M2& r) -> M2 { return sm * r * sp; }, S.Km);
    return S;
}

inline Eigen::Matrix4cd liouvillian_matrix(const GeneratorCoeffs& g) {
    static const Superoperators S = superoperators();
    return -g.Gamma * Eigen::Matrix4cd::Identity() + g.eps0 * S.J0 + g.eps_plus * S.Jp +
           g.eps_minus * S.Jm + g.nu0 * S.K0 + g.nu_plus * S.Kp + g.nu_minus * S.Km;
}

struct LiouvillianSample {
    double t;
    Eigen::Matrix4cd L;
};

inline LiouvillianSample liouvillian(const ReservoirParams& p, double t) {
    return {t, liouvillian_matrix(generator_coeffs(p, t))};
}

// Integrates the vectorized master equation from rho0 at t = 0, invoking
// emit(t, rho) at every grid time. This route never touches the algebraic
// solution, so the two can be compared as independent computations.
template <class Emit>
void evolve_direct(const ReservoirParams& p, const Eigen::Matrix2cd& rho0,
                   const std::vector<double>& grid, const OdeOptions& opt, Emit&& emit) {
    integrate_dopri5<4>(
        [&p](double t, const Eigen::Vector4cd& v) -> Eigen::Vector4cd {
            return liouvillian_matrix(generator_coeffs(p, t)) * v;
        },
        0.0, vectorize(rho0), grid, opt,
        [&](double t, const Eigen::Vector4cd& v) { emit(t, devectorize(v)); });
}

inline std::vector<Eigen::Matrix2cd> evolve_direct(const ReservoirParams& p,
                                                   const Eigen::Matrix2cd& rho0,
                                                   const std::vector<double>& grid,
                                                   const OdeOptions& opt = {}) {
    std::vector<Eigen::Matrix2cd> out;
    out.reserve(grid.size());
    evolve_direct(p, rho0, grid, opt,
                  [&](double, const Eigen::Matrix2cd& rho) { out.push_back(rho); });
    return out;
}

}  // namespace sqdyn
