// reservoir.hpp — closed-form reservoir and generator functions for a qubit
// coupled to a squeezed Lorentzian reservoir. Everything is expressed in units
// of the reservoir linewidth: gamma = 1, rates are multiples of gamma, times
// are multiples of 1/gamma.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sqdyn {

using cplx = std::complex<double>;

struct ReservoirParams {
    double lambda{10.0};  // coupling strength (units of gamma); 0 = decoupled limit
    double omega0{10.0};  // qubit transition frequency (units of gamma)
    double r{0.0};        // squeeze magnitude, >= 0
    double theta{0.0};    // squeeze phase (radians)
};

struct SqueezeMoments {
    double N;  // mean photon number per mode: sinh^2 r
    cplx M;    // anomalous correlation: -e^{i theta} sinh r cosh r
};

struct CorrelationSample {
    double t;
    cplx alpha;        // running integral of the counter-rotating kernel
    double f;          // running integral of the resonant kernel
    cplx alpha_tilde;  // time integral of alpha
    double F;          // time integral of f
};

struct GeneratorCoeffs {
    double Gamma;      // overall decay rate (real)
    cplx eps0;         // J0 coefficient (purely imaginary)
    cplx eps_plus;     // J+ coefficient
    cplx eps_minus;    // J- coefficient (conjugate of eps_plus)
    double nu0;        // K0 coefficient
    double nu_plus;    // K+ coefficient
    double nu_minus;   // K- coefficient
};

struct AccumulatedDecay {
    double gamma_k;  // prefactor exponent Gamma_k(t) = integral of Gamma
};

inline SqueezeMoments squeeze_moments(const ReservoirParams& p) {
    const double sh = std::sinh(p.r);
    const double ch = std::cosh(p.r);
    return {sh * sh, -std::exp(cplx(0.0, p.theta)) * (sh * ch)};
}

inline CorrelationSample correlations(const ReservoirParams& p, double t) {
    const cplx z(1.0, 2.0 * p.omega0);
    const cplx em = std::exp(-z * t);
    CorrelationSample s;
    s.t = t;
    s.alpha = p.lambda * (1.0 - em) / (2.0 * z);
    s.f = 0.5 * p.lambda * (1.0 - std::exp(-t));
    s.alpha_tilde = p.lambda * (t - (1.0 - em) / z) / (2.0 * z);
    s.F = 0.5 * p.lambda * (t - (1.0 - std::exp(-t)));
    return s;
}

inline GeneratorCoeffs generator_coeffs(const ReservoirParams& p, double t) {
    const SqueezeMoments sm = squeeze_moments(p);
    const CorrelationSample c = correlations(p, t);
    const double N = sm.N;
    const cplx M = sm.M;
    const double MR = M.real(), MI = M.imag();
    const double aR = c.alpha.real(), aI = c.alpha.imag();
    const double f = c.f;
    GeneratorCoeffs g;
    g.Gamma = 2.0 * MR * f + 2.0 * (MR * aR + MI * aI) + (2.0 * N + 1.0) * (f + aR);
    g.eps0 = cplx(0.0, -2.0 * (p.omega0 + 2.0 * (MI * aR - MI * f - MR * aR)
                               - (2.0 * N + 1.0) * aR));
    g.eps_plus = 2.0 * M * f + 2.0 * std::conj(M) * c.alpha
               + (2.0 * N + 1.0) * (f + c.alpha);
    g.eps_minus = 2.0 * M * std::conj(c.alpha) + 2.0 * std::conj(M) * f
                + (2.0 * N + 1.0) * (f + std::conj(c.alpha));
    g.nu0 = 2.0 * (aR - f);
    g.nu_plus = 2.0 * (MR * f + MR * aR + MI * aI + N * f + (N + 1.0) * aR);
    g.nu_minus = 2.0 * (MR * f + MR * aR + MI * aI + (N + 1.0) * f + N * aR);
    return g;
}

inline AccumulatedDecay accumulated_decay(const ReservoirParams& p, double t) {
    const SqueezeMoments sm = squeeze_moments(p);
    const CorrelationSample c = correlations(p, t);
    return {(2.0 * sm.M.real() + 2.0 * sm.N + 1.0) * (c.F + c.alpha_tilde.real())
            + 2.0 * sm.M.imag() * c.alpha_tilde.imag()};
}

// Raw reservoir kernels (derivatives of the running integrals up to the frame
// phase), exposed for the spectral-density quadrature cross-check.
inline cplx kernel_resonant(const ReservoirParams& p, double t) {
    return {0.5 * p.lambda * std::exp(-t), 0.0};
}

inline cplx kernel_counter_rotating(const ReservoirParams& p, double t) {
    return 0.5 * p.lambda * std::exp(cplx(-1.0, 2.0 * p.omega0) * t);
}

// Lorentzian spectral density of unit width centered at omega0, normalized so
// that its full-line integral is lambda/2.
inline double lorentzian_density(const ReservoirParams& p, double omega) {
    const double d = omega - p.omega0;
    return p.lambda / (2.0 * std::numbers::pi) / (d * d + 1.0);
}

struct QuadratureNonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
cplx adaptive_simpson_rec(F& f, double a, double b, cplx fa, cplx fm, cplx fb,
                          cplx whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const cplx flm = f(lm);
    const cplx frm = f(rm);
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0)
        throw QuadratureNonConvergence("adaptive Simpson bisection limit reached");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
cplx adaptive_simpson(F f, double a, double b, double tol, int depth = 48) {
    const cplx fa = f(a);
    const cplx fb = f(b);
    const cplx fm = f(0.5 * (a + b));
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Oscillatory-safe wrapper: pre-split into panels so a symmetric oscillation
// cannot fool the first Simpson estimate, then refine adaptively per panel.
template <class F>
cplx panel_simpson(F f, double a, double b, double tol, int panels = 64) {
    cplx acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + (b - a) * i / panels;
        const double x1 = a + (b - a) * (i + 1) / panels;
        acc += adaptive_simpson(f, x0, x1, tol / panels);
    }
    return acc;
}

}  // namespace detail

// Compares the closed-form kernels against direct quadrature of the spectral
// density over the window [omega0 - 50, omega0 + 50] and returns the larger
// deviation. At t = 0 the truncated Lorentzian tails dominate the residual:
// the window captures only (2/pi) atan(50) of the line, so the deviation is
// (1 - (2/pi) atan(50)) * lambda/2 ~ 6.3653e-3 * lambda no matter how accurate
// the quadrature is. For t >~ 0.2 the oscillatory tail integral decays and the
// residual falls below 1e-3 * lambda.
inline double kernel_quadrature_check(const ReservoirParams& p, double t) {
    const double a = p.omega0 - 50.0;
    const double b = p.omega0 + 50.0;
    const double tol = 1e-12 * std::max(1.0, p.lambda);
    const cplx q_res = detail::panel_simpson(
        [&](double w) {
            return lorentzian_density(p, w) * std::exp(cplx(0.0, -(w - p.omega0) * t));
        },
        a, b, tol);
    const cplx q_ctr = detail::panel_simpson(
        [&](double w) {
            return lorentzian_density(p, w) * std::exp(cplx(0.0, (w + p.omega0) * t));
        },
        a, b, tol);
    return std::max(std::abs(q_res - kernel_resonant(p, t)),
                    std::abs(q_ctr - kernel_counter_rotating(p, t)));
}

}  // namespace sqdyn
