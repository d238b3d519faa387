#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "sqdyn/entanglement.hpp"
#include "sqdyn/liouville.hpp"

namespace sqdyn {

// ---------------------------------------------------------------------------
// Single-run configuration and time series
// ---------------------------------------------------------------------------

struct RunConfig {
    ReservoirParams params;
    BellFamilyState initial;
    double t_max{5.0};
    int n_times{2000};
    OdeOptions ode;
    double esd_threshold{1e-6};
    int esd_window{5};
};

// flag: 0 = ok, 1 = propagator singularity reached before this time,
// 2 = map assembly overflowed at this time.
struct SeriesPoint {
    double gamma_t{0.0};
    double concurrence{0.0};
    double trace{0.0};
    double min_eig{0.0};
    double gamma_k{0.0};
    int flag{0};
};

struct SeriesResult {
    std::vector<SeriesPoint> points;
    // Death/revival scan over the maximal unflagged prefix of the series.
    EsdResult esd;
};

inline std::vector<double> uniform_grid(double t_max, int n_times) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
    if (n_times < 2) throw std::invalid_argument("need at least two grid points");
    std::vector<double> t(static_cast<std::size_t>(n_times));
    for (int i = 0; i < n_times; ++i)
        t[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / (n_times - 1);
    return t;
}

// Evolves the chosen two-qubit state on a uniform grid and reports, per time,
// the concurrence, trace, smallest eigenvalue and accumulated decay of the
// joint state. A finite-time singularity of the auxiliary system does not
// abort the run: the remaining times are emitted with flag 1 and quiet NaNs
// in the state-dependent columns (the accumulated decay has a closed form and
// stays available). Overflow while assembling a single map flags that point
// with 2 and the run continues.
inline SeriesResult run_series(const RunConfig& cfg) {
    if (cfg.esd_window < 1) throw std::invalid_argument("esd window must be positive");
    if (cfg.n_times < 2 * cfg.esd_window)
        throw std::invalid_argument("n_times must be at least twice the esd window");

    const std::vector<double> grid = uniform_grid(cfg.t_max, cfg.n_times);
    const TwoQubitDensity rho0 = initial_state(cfg.initial);
    const RiccatiRun run = integrate_riccati_run(cfg.params, grid, cfg.ode);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    SeriesResult res;
    res.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SeriesPoint& pt = res.points[i];
        pt.gamma_t = grid[i];
        if (i >= run.states.size()) {
            pt.flag = 1;
            pt.gamma_k = accumulated_decay(cfg.params, grid[i]).gamma_k;
            pt.concurrence = pt.trace = pt.min_eig = nan;
            continue;
        }
        const RiccatiState& s = run.states[i];
        pt.gamma_k = s.gamma_k;
        try {
            const SingleQubitMap m = assemble_map(s);
            const TwoQubitDensity joint = joint_density(m, rho0);
            pt.concurrence = concurrence_x(joint);
            pt.trace = joint.trace().real();
            const Eigen::Matrix4cd herm = 0.5 * (joint + joint.adjoint());
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(herm);
            pt.min_eig = eig.eigenvalues().minCoeff();
        } catch (const MapOverflow&) {
            pt.flag = 2;
            pt.concurrence = pt.trace = pt.min_eig = nan;
        }
    }

    std::vector<double> t_ok, c_ok;
    for (const SeriesPoint& pt : res.points) {
        if (pt.flag != 0) break;
        t_ok.push_back(pt.gamma_t);
        c_ok.push_back(pt.concurrence);
    }
    if (static_cast<int>(t_ok.size()) >= 2 * cfg.esd_window)
        res.esd = detect_esd(t_ok, c_ok, cfg.esd_threshold, cfg.esd_window);
    return res;
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { R, Theta, BetaSq, Omega0, Lambda };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::R: return "r";
        case SweepAxis::Theta: return "theta";
        case SweepAxis::BetaSq: return "beta_sq";
        case SweepAxis::Omega0: return "omega0";
        case SweepAxis::Lambda: return "lambda";
    }
    return "?";
}

inline std::optional<SweepAxis> parse_axis(std::string_view s) {
    if (s == "r") return SweepAxis::R;
    if (s == "theta") return SweepAxis::Theta;
    if (s == "beta_sq" || s == "beta-sq") return SweepAxis::BetaSq;
    if (s == "omega0") return SweepAxis::Omega0;
    if (s == "lambda") return SweepAxis::Lambda;
    return std::nullopt;
}

struct SweepSpec {
    RunConfig base;
    SweepAxis axis{SweepAxis::R};
    double axis_min{0.0};
    double axis_max{0.0};
    double axis_step{0.0};
    int workers{1};
};

inline std::vector<double> axis_values(const SweepSpec& spec) {
    if (!(spec.axis_max >= spec.axis_min))
        throw std::invalid_argument("axis range is empty");
    if (!(spec.axis_step > 0.0)) {
        if (spec.axis_min == spec.axis_max) return {spec.axis_min};
        throw std::invalid_argument("axis step must be positive for a non-degenerate range");
    }
    std::vector<double> vals;
    const double tol = spec.axis_step * 1e-9;
    for (int k = 0;; ++k) {
        const double v = spec.axis_min + k * spec.axis_step;
        if (v > spec.axis_max + tol) break;
        vals.push_back(v);
    }
    return vals;
}

inline RunConfig bind_axis(const RunConfig& base, SweepAxis axis, double value) {
    RunConfig cfg = base;
    switch (axis) {
        case SweepAxis::R: cfg.params.r = value; break;
        case SweepAxis::Theta: cfg.params.theta = value; break;
        case SweepAxis::BetaSq: cfg.initial.beta = std::sqrt(value); break;
        case SweepAxis::Omega0: cfg.params.omega0 = value; break;
        case SweepAxis::Lambda: cfg.params.lambda = value; break;
    }
    return cfg;
}

struct SweepRow {
    double axis_value{0.0};
    std::optional<double> esd_time;
    int revival_count{0};
    // Extremes of the concurrence restricted to times at or after the first
    // death; NaN when the series never dies.
    double c_min_after_death{std::numeric_limits<double>::quiet_NaN()};
    double c_max_after_death{std::numeric_limits<double>::quiet_NaN()};
    int n_flagged{0};
    SeriesResult series;
};

inline SweepRow summarize_series(double axis_value, SeriesResult series) {
    SweepRow row;
    row.axis_value = axis_value;
    row.esd_time = series.esd.esd_time;
    row.revival_count = series.esd.revival_count;
    for (const SeriesPoint& pt : series.points) row.n_flagged += pt.flag != 0;
    if (row.esd_time) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const SeriesPoint& pt : series.points) {
            if (pt.flag != 0 || pt.gamma_t < *row.esd_time) continue;
            lo = std::min(lo, pt.concurrence);
            hi = std::max(hi, pt.concurrence);
        }
        if (lo <= hi) {
            row.c_min_after_death = lo;
            row.c_max_after_death = hi;
        }
    }
    row.series = std::move(series);
    return row;
}

// Runs one series per axis value. Rows are computed independently (optionally
// by a worker pool) and returned in axis order, so the output is identical
// for every worker count.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    const std::vector<double> vals = axis_values(spec);
    std::vector<SweepRow> rows(vals.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= vals.size()) return;
            try {
                const RunConfig cfg = bind_axis(spec.base, spec.axis, vals[i]);
                rows[i] = summarize_series(vals[i], run_series(cfg));
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int workers = std::clamp<int>(spec.workers, 1, static_cast<int>(vals.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

struct FigurePreset {
    std::string name;
    SweepSpec spec;
};

namespace detail {

inline SweepSpec make_preset(BellFamily family, double lambda, double omega0,
                             SweepAxis axis, double lo, double hi, double step) {
    SweepSpec s;
    s.base.params.lambda = lambda;
    s.base.params.omega0 = omega0;
    s.base.params.r = 0.2;
    s.base.params.theta = std::numbers::pi / 4.0;
    s.base.initial.family = family;
    s.base.initial.beta = std::numbers::sqrt2 / 2.0;
    s.axis = axis;
    s.axis_min = lo;
    s.axis_max = hi;
    s.axis_step = step;
    return s;
}

}  // namespace detail

// The published parameter surfaces. Axis grids are a rendering choice:
// theta spans one full period in steps of pi/16, beta^2 stays strictly
// inside (0,1) in steps of 0.05, and r extends past 1 to cover the
// monotone-death regime. fig8 exists in two variants because the source
// text and caption disagree on lambda (10 vs 20); fig8c is the companion
// case discussed only in prose (Psi at lambda=20, omega0=2).
inline const std::vector<FigurePreset>& figure_presets() {
    using enum BellFamily;
    using enum SweepAxis;
    constexpr double pi = std::numbers::pi;
    static const std::vector<FigurePreset> presets = [] {
        std::vector<FigurePreset> v;
        v.push_back({"fig1", detail::make_preset(Phi, 10, 10, Theta, 0.0, 2.0 * pi, pi / 16.0)});
        v.push_back({"fig2", detail::make_preset(Psi, 10, 10, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig3", detail::make_preset(Phi, 10, 10, R, 0.0, 1.5, 0.1)});
        v.push_back({"fig4", detail::make_preset(Psi, 10, 10, R, 0.0, 1.5, 0.1)});
        v.push_back({"fig5", detail::make_preset(Phi, 10, 12, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig6", detail::make_preset(Phi, 10, 10, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig7", detail::make_preset(Phi, 10, 6.5, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig8a", detail::make_preset(Phi, 10, 3, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig8b", detail::make_preset(Phi, 20, 3, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig8c", detail::make_preset(Psi, 20, 2, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig9", detail::make_preset(Psi, 10, 12, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig10", detail::make_preset(Psi, 10, 10, BetaSq, 0.05, 0.95, 0.05)});
        v.push_back({"fig11", detail::make_preset(Psi, 10, 6.5, BetaSq, 0.05, 0.95, 0.05)});
        return v;
    }();
    return presets;
}

inline const FigurePreset* find_figure_preset(std::string_view name) {
    for (const FigurePreset& p : figure_presets())
        if (p.name == name) return &p;
    return nullptr;
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Header comment lines carrying the full parameter binding. Keys use the
// command-line flag spelling, so stripping the leading "# " yields a valid
// config file reproducing the run.
inline void write_binding_lines(std::ostream& os, const RunConfig& cfg) {
    os << "# lambda = " << format_g17(cfg.params.lambda) << '\n'
       << "# omega0 = " << format_g17(cfg.params.omega0) << '\n'
       << "# r = " << format_g17(cfg.params.r) << '\n'
       << "# theta = " << format_g17(cfg.params.theta) << '\n'
       << "# family = " << (cfg.initial.family == BellFamily::Phi ? "phi" : "psi") << '\n'
       << "# beta-sq = " << format_g17(cfg.initial.beta * cfg.initial.beta) << '\n'
       << "# phi = " << format_g17(cfg.initial.phi) << '\n'
       << "# t-max = " << format_g17(cfg.t_max) << '\n'
       << "# n-times = " << cfg.n_times << '\n'
       << "# rel-tol = " << format_g17(cfg.ode.rel_tol) << '\n'
       << "# abs-tol = " << format_g17(cfg.ode.abs_tol) << '\n'
       << "# esd-threshold = " << format_g17(cfg.esd_threshold) << '\n'
       << "# esd-window = " << cfg.esd_window << '\n';
}

inline constexpr const char* kSeriesHeader = "gamma_t,concurrence,trace,min_eig,gamma_k,flag";

inline void write_series_rows(std::ostream& os, const SeriesResult& series) {
    os << kSeriesHeader << '\n';
    for (const SeriesPoint& pt : series.points)
        os << format_g17(pt.gamma_t) << ',' << format_g17(pt.concurrence) << ','
           << format_g17(pt.trace) << ',' << format_g17(pt.min_eig) << ','
           << format_g17(pt.gamma_k) << ',' << pt.flag << '\n';
}

inline void write_series_csv(std::ostream& os, const RunConfig& cfg, const SeriesResult& series) {
    write_binding_lines(os, cfg);
    write_series_rows(os, series);
}

// One summary row per axis value; the errors column counts flagged points.
inline void write_sweep_csv(std::ostream& os, const SweepSpec& spec,
                            const std::vector<SweepRow>& rows) {
    write_binding_lines(os, spec.base);
    os << "# axis = " << axis_name(spec.axis) << '\n'
       << "# axis-min = " << format_g17(spec.axis_min) << '\n'
       << "# axis-max = " << format_g17(spec.axis_max) << '\n'
       << "# axis-step = " << format_g17(spec.axis_step) << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    os << axis_name(spec.axis)
       << ",esd_time,revival_count,c_min_after_death,c_max_after_death,errors\n";
    for (const SweepRow& row : rows)
        os << format_g17(row.axis_value) << ','
           << format_g17(row.esd_time ? *row.esd_time : nan) << ','
           << row.revival_count << ','
           << format_g17(row.c_min_after_death) << ','
           << format_g17(row.c_max_after_death) << ','
           << row.n_flagged << '\n';
}

// Full series per axis value, as consecutive self-describing blocks: each
// block repeats the parameter binding with the axis value substituted, so
// any block cut out of the file is a complete series CSV.
inline void write_figure_csv(std::ostream& os, const SweepSpec& spec,
                             const std::vector<SweepRow>& rows) {
    bool first = true;
    for (const SweepRow& row : rows) {
        if (!first) os << '\n';
        first = false;
        write_series_csv(os, bind_axis(spec.base, spec.axis, row.axis_value), row.series);
    }
}

// ---------------------------------------------------------------------------
// Validation harness
// ---------------------------------------------------------------------------

struct ValidateOptions {
    int n_cases{200};
    std::uint64_t seed{0};
    int workers{1};
    int n_times{201};
    double t_max{5.0};
    OdeOptions ode;
    double tol_density{1e-6};
    double tol_trace{1e-9};
    double tol_herm{1e-10};
    double tol_conc{1e-9};
    double tol_vacuum_limit{1e-12};
    double tol_decoupled_drift{1e-10};
};

struct ValidateReport {
    std::string text;
    bool pass{false};
    double max_density_dev{0.0};
    double max_trace_dev{0.0};
    double max_herm_asym{0.0};
    double max_conc_dev{0.0};
    double commutator_residual{0.0};
    double max_vacuum_limit_residual{0.0};
    double max_decoupled_drift{0.0};
    int n_singular{0};
};

namespace detail {

struct ValidateCase {
    ReservoirParams params;
    BellFamilyState initial;
    Eigen::Matrix2cd rho0;
};

struct ValidateCaseResult {
    double density_dev{0.0};
    double trace_dev{0.0};
    double herm_asym{0.0};
    double conc_dev{0.0};
    bool singular{false};
};

inline double unit_draw(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline ValidateCase draw_case(std::mt19937_64& gen) {
    constexpr double pi = std::numbers::pi;
    ValidateCase c;
    c.params.lambda = 20.0 * unit_draw(gen);
    c.params.omega0 = 2.0 + 13.0 * unit_draw(gen);
    c.params.r = 1.2 * unit_draw(gen);
    c.params.theta = 2.0 * pi * unit_draw(gen);
    const double beta_sq = std::clamp(unit_draw(gen), 1e-9, 1.0 - 1e-9);
    c.initial.beta = std::sqrt(beta_sq);
    c.initial.family = unit_draw(gen) < 0.5 ? BellFamily::Phi : BellFamily::Psi;
    c.initial.phi = 2.0 * pi * unit_draw(gen);
    const double d = unit_draw(gen);
    const double s = unit_draw(gen) * std::sqrt(d * (1.0 - d));
    const double ph = 2.0 * pi * unit_draw(gen);
    const cplx off = s * std::exp(cplx(0.0, ph));
    c.rho0 << cplx(d), off, std::conj(off), cplx(1.0 - d);
    return c;
}

inline double max_abs(const Eigen::Matrix2cd& m) { return m.cwiseAbs().maxCoeff(); }

inline ValidateCaseResult validate_one(const ValidateCase& c, const std::vector<double>& grid,
                                       const OdeOptions& opt) {
    ValidateCaseResult r;
    const RiccatiRun run = integrate_riccati_run(c.params, grid, opt);
    if (run.singular_t || run.states.size() != grid.size()) {
        r.singular = true;
        return r;
    }
    std::vector<Eigen::Matrix2cd> direct = evolve_direct(c.params, c.rho0, grid, opt);
    const TwoQubitDensity joint0 = initial_state(c.initial);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const SingleQubitMap m = assemble_map(run.states[i]);
        const Eigen::Matrix2cd alg = evolve_qubit(m, c.rho0);
        const Eigen::Matrix2cd& dir = direct[i];
        r.density_dev = std::max(r.density_dev, max_abs(alg - dir));
        r.trace_dev = std::max({r.trace_dev, std::abs(alg.trace() - 1.0), std::abs(dir.trace() - 1.0)});
        r.herm_asym = std::max({r.herm_asym, max_abs(alg - alg.adjoint()), max_abs(dir - dir.adjoint())});
        const TwoQubitDensity joint = joint_density(m, joint0);
        const double cx = concurrence_x(joint);
        const double cf = concurrence_full(joint).value;
        r.conc_dev = std::max(r.conc_dev, std::abs(cx - cf));
    }
    return r;
}

inline double commutator_residual_max() {
    const Superoperators S = superoperators();
    const auto comm = [](const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
        return (a * b - b * a).eval();
    };
    double worst = 0.0;
    const Eigen::Matrix4cd defects[6] = {
        comm(S.Jm, S.Jp) + 2.0 * S.J0, comm(S.J0, S.Jp) - S.Jp, comm(S.J0, S.Jm) + S.Jm,
        comm(S.Km, S.Kp) + 2.0 * S.K0, comm(S.K0, S.Kp) - S.Kp, comm(S.K0, S.Km) + S.Km};
    for (const Eigen::Matrix4cd& d : defects) worst = std::max(worst, d.cwiseAbs().maxCoeff());
    return worst;
}

inline void report_check(std::ostream& os, const char* label, double measured, double tol,
                         bool& pass) {
    const bool ok = measured <= tol;
    pass = pass && ok;
    os << label << format_g17(measured) << "  (tolerance " << format_g17(tol) << ")  "
       << (ok ? "PASS" : "FAIL") << '\n';
}

}  // namespace detail

// Randomized cross-check of the algebraic propagator against direct
// integration of the master equation, over the parameter box
// lambda in [0,20], omega0 in [2,15], r in [0,1.2], theta in [0,2pi),
// plus forced vacuum (r=0) and decoupled (lambda=0) limit cases.
// All deviations are absolute maxima over a uniform time grid.
inline ValidateReport run_validate(const ValidateOptions& opt = {}) {
    if (opt.n_cases < 1) throw std::invalid_argument("need at least one validation case");
    constexpr int kLimitCases = 5;

    std::mt19937_64 gen(opt.seed);
    std::vector<detail::ValidateCase> cases;
    cases.reserve(static_cast<std::size_t>(opt.n_cases + 2 * kLimitCases));
    for (int i = 0; i < opt.n_cases; ++i) cases.push_back(detail::draw_case(gen));
    for (int i = 0; i < kLimitCases; ++i) {
        detail::ValidateCase c = detail::draw_case(gen);
        c.params.r = 0.0;
        cases.push_back(c);
    }
    for (int i = 0; i < kLimitCases; ++i) {
        detail::ValidateCase c = detail::draw_case(gen);
        c.params.lambda = 0.0;
        cases.push_back(c);
    }

    const std::vector<double> grid = uniform_grid(opt.t_max, opt.n_times);

    // Main randomized cases, computed into ordered slots so the report is
    // identical for every worker count.
    std::vector<detail::ValidateCaseResult> results(static_cast<std::size_t>(opt.n_cases));
    {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= results.size()) return;
                try {
                    results[i] = detail::validate_one(cases[i], grid, opt.ode);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        const int workers = std::clamp<int>(opt.workers, 1, opt.n_cases);
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (std::thread& th : pool) th.join();
        }
        if (failure) std::rethrow_exception(failure);
    }

    ValidateReport rep;
    std::size_t worst_case = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const detail::ValidateCaseResult& r = results[i];
        if (r.singular) {
            ++rep.n_singular;
            continue;
        }
        if (r.density_dev > rep.max_density_dev) {
            rep.max_density_dev = r.density_dev;
            worst_case = i;
        }
        rep.max_trace_dev = std::max(rep.max_trace_dev, r.trace_dev);
        rep.max_herm_asym = std::max(rep.max_herm_asym, r.herm_asym);
        rep.max_conc_dev = std::max(rep.max_conc_dev, r.conc_dev);
    }

    rep.commutator_residual = detail::commutator_residual_max();

    // Vacuum limit: the accumulated decay must reduce to its closed
    // rotating-frame form and the squeeze moments must vanish identically.
    for (int i = 0; i < kLimitCases; ++i) {
        const detail::ValidateCase& c = cases[static_cast<std::size_t>(opt.n_cases + i)];
        const SqueezeMoments mom = squeeze_moments(c.params);
        rep.max_vacuum_limit_residual =
            std::max({rep.max_vacuum_limit_residual, std::abs(mom.N), std::abs(mom.M)});
        for (const double t : grid) {
            const CorrelationSample corr = correlations(c.params, t);
            const double reduced = corr.F + corr.alpha_tilde.real();
            const double gk = accumulated_decay(c.params, t).gamma_k;
            rep.max_vacuum_limit_residual =
                std::max(rep.max_vacuum_limit_residual, std::abs(gk - reduced));
        }
    }

    // Decoupled limit: with lambda = 0 the concurrence must not drift.
    for (int i = 0; i < kLimitCases; ++i) {
        const detail::ValidateCase& c = cases[static_cast<std::size_t>(opt.n_cases + kLimitCases + i)];
        const TwoQubitDensity joint0 = initial_state(c.initial);
        const std::vector<RiccatiState> states = integrate_riccati(c.params, grid, opt.ode);
        const double c0 = concurrence_x(joint_density(assemble_map(states[0]), joint0));
        for (const RiccatiState& s : states) {
            const double ct = concurrence_x(joint_density(assemble_map(s), joint0));
            rep.max_decoupled_drift = std::max(rep.max_decoupled_drift, std::abs(ct - c0));
        }
    }

    std::ostringstream os;
    os << "validation run\n";
    os << "  cases  : " << opt.n_cases << " randomized + " << 2 * kLimitCases << " limit cases\n";
    os << "  seed   : " << opt.seed << '\n';
    os << "  grid   : " << opt.n_times << " points on [0, " << format_g17(opt.t_max) << "]\n";
    os << "  box    : lambda in [0,20], omega0 in [2,15], r in [0,1.2], theta in [0,2pi)\n";
    bool pass = true;
    detail::report_check(os, "algebraic vs direct density, max abs dev : ", rep.max_density_dev,
                         opt.tol_density, pass);
    detail::report_check(os, "trace deviation from one, max            : ", rep.max_trace_dev,
                         opt.tol_trace, pass);
    detail::report_check(os, "hermiticity asymmetry, max               : ", rep.max_herm_asym,
                         opt.tol_herm, pass);
    detail::report_check(os, "x-form vs spectral concurrence, max dev  : ", rep.max_conc_dev,
                         opt.tol_conc, pass);
    detail::report_check(os, "superoperator commutation residual       : ", rep.commutator_residual,
                         0.0, pass);
    detail::report_check(os, "vacuum limit (r=0) decay residual        : ",
                         rep.max_vacuum_limit_residual, opt.tol_vacuum_limit, pass);
    detail::report_check(os, "decoupled limit (lambda=0) conc drift    : ",
                         rep.max_decoupled_drift, opt.tol_decoupled_drift, pass);
    if (rep.n_singular > 0) {
        pass = false;
        os << "propagator singularities encountered     : " << rep.n_singular << "  FAIL\n";
    }
    if (!results.empty()) {
        const detail::ValidateCase& w = cases[worst_case];
        os << "worst density case: lambda = " << format_g17(w.params.lambda)
           << ", omega0 = " << format_g17(w.params.omega0) << ", r = " << format_g17(w.params.r)
           << ", theta = " << format_g17(w.params.theta) << '\n';
    }
    os << "RESULT: " << (pass ? "PASS" : "FAIL") << '\n';
    rep.pass = pass;
    rep.text = os.str();
    return rep;
}

}  // namespace sqdyn
