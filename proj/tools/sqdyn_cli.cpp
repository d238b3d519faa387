#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "sqdyn/sweep.hpp"

namespace {

using namespace sqdyn;

struct CliValues {
    double lambda{10.0};
    double omega0{10.0};
    double r{0.2};
    double theta{std::numbers::pi / 4.0};
    double beta_sq{0.5};
    double phi{0.0};
    std::string family{"phi"};
    double t_max{5.0};
    int n_times{2000};
    double rel_tol{1e-9};
    double abs_tol{1e-12};
    double esd_threshold{1e-6};
    int esd_window{5};
    std::string axis;
    double axis_min{0.0};
    double axis_max{0.0};
    double axis_step{0.0};
    int cases{200};
    std::uint64_t seed{0};
    int workers{1};
    std::string out;
};

RunConfig to_run_config(const CliValues& v) {
    RunConfig cfg;
    cfg.params = {v.lambda, v.omega0, v.r, v.theta};
    cfg.initial.family = v.family == "psi" ? BellFamily::Psi : BellFamily::Phi;
    cfg.initial.beta = std::sqrt(v.beta_sq);
    cfg.initial.phi = v.phi;
    cfg.t_max = v.t_max;
    cfg.n_times = v.n_times;
    cfg.ode = {v.rel_tol, v.abs_tol};
    cfg.esd_threshold = v.esd_threshold;
    cfg.esd_window = v.esd_window;
    return cfg;
}

// Grid, tolerance and detection settings apply on top of a figure preset;
// the physics fields stay bound to the published caption.
void overlay_run_settings(RunConfig& cfg, const CliValues& v) {
    cfg.t_max = v.t_max;
    cfg.n_times = v.n_times;
    cfg.ode = {v.rel_tol, v.abs_tol};
    cfg.esd_threshold = v.esd_threshold;
    cfg.esd_window = v.esd_window;
}

int with_output(const std::string& path, const std::function<void(std::ostream&)>& emit) {
    if (path.empty()) {
        emit(std::cout);
        return 0;
    }
    std::ofstream os(path);
    if (!os) {
        std::cerr << "error: cannot open '" << path << "' for writing\n";
        return 1;
    }
    emit(os);
    return 0;
}

std::string describe_esd(const EsdResult& esd) {
    std::string s = "esd_time = ";
    s += esd.esd_time ? format_g17(*esd.esd_time) : "none";
    s += ", revivals = " + std::to_string(esd.revival_count);
    s += ", dark intervals = " + std::to_string(esd.dark_intervals.size());
    return s;
}

int run_series_command(const CliValues& v) {
    const RunConfig cfg = to_run_config(v);
    const SeriesResult res = run_series(cfg);
    int flagged = 0;
    for (const SeriesPoint& pt : res.points) flagged += pt.flag != 0;
    const int rc = with_output(v.out, [&](std::ostream& os) { write_series_csv(os, cfg, res); });
    if (rc == 0)
        std::cerr << "series: " << res.points.size() << " points, " << describe_esd(res.esd)
                  << ", flagged = " << flagged << '\n';
    return rc;
}

int run_sweep_command(const CliValues& v, const CLI::App& app) {
    if (app.count("--axis") == 0 || app.count("--axis-min") == 0 || app.count("--axis-max") == 0) {
        std::cerr << "error: sweep needs --axis, --axis-min and --axis-max"
                     " (--axis-step unless the range is a single value)\n";
        return 2;
    }
    const std::optional<SweepAxis> axis = parse_axis(v.axis);
    if (!axis) {
        std::cerr << "error: unknown axis '" << v.axis
                  << "' (expected r, theta, beta_sq, omega0 or lambda)\n";
        return 2;
    }
    SweepSpec spec;
    spec.base = to_run_config(v);
    spec.axis = *axis;
    spec.axis_min = v.axis_min;
    spec.axis_max = v.axis_max;
    spec.axis_step = v.axis_step;
    spec.workers = v.workers;
    const auto rows = run_sweep(spec);
    const int rc = with_output(v.out, [&](std::ostream& os) { write_sweep_csv(os, spec, rows); });
    if (rc == 0)
        std::cerr << "sweep: " << rows.size() << " values of " << axis_name(spec.axis) << '\n';
    return rc;
}

int run_figure_command(const CliValues& v, const std::string& name) {
    const FigurePreset* preset = find_figure_preset(name);
    if (preset == nullptr) {
        std::cerr << "error: unknown figure preset '" << name << "'; available:";
        for (const FigurePreset& p : figure_presets()) std::cerr << ' ' << p.name;
        std::cerr << '\n';
        return 2;
    }
    SweepSpec spec = preset->spec;
    overlay_run_settings(spec.base, v);
    spec.workers = v.workers;
    const auto rows = run_sweep(spec);
    const int rc = with_output(v.out, [&](std::ostream& os) { write_figure_csv(os, spec, rows); });
    if (rc == 0)
        std::cerr << "figure " << preset->name << ": " << rows.size() << " values of "
                  << axis_name(spec.axis) << " x " << spec.base.n_times << " points\n";
    return rc;
}

int run_validate_command(const CliValues& v) {
    ValidateOptions opt;
    opt.n_cases = v.cases;
    opt.seed = v.seed;
    opt.workers = v.workers;
    opt.ode = {v.rel_tol, v.abs_tol};
    const ValidateReport rep = run_validate(opt);
    const int rc = with_output(v.out, [&](std::ostream& os) { os << rep.text; });
    if (rc != 0) return rc;
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact decoherence of qubits in a squeezed non-Markovian reservoir"};
    app.require_subcommand(1);
    CliValues v;

    app.add_option("--lambda", v.lambda, "Reservoir spectral width (units of gamma)");
    app.add_option("--omega0", v.omega0, "Qubit transition frequency (units of gamma)");
    app.add_option("--r", v.r, "Squeeze magnitude");
    app.add_option("--theta", v.theta, "Squeeze phase");
    app.add_option("--beta-sq", v.beta_sq, "Initial-state weight beta^2, strictly inside (0,1)");
    app.add_option("--phi", v.phi, "Relative phase of the initial state");
    app.add_option("--family", v.family, "Initial Bell family")
        ->check(CLI::IsMember({"phi", "psi"}));
    app.add_option("--t-max", v.t_max, "End of the time grid (units of 1/gamma)");
    app.add_option("--n-times", v.n_times, "Number of grid points");
    app.add_option("--rel-tol", v.rel_tol, "Integrator relative tolerance");
    app.add_option("--abs-tol", v.abs_tol, "Integrator absolute tolerance");
    app.add_option("--esd-threshold", v.esd_threshold, "Concurrence level counted as death");
    app.add_option("--esd-window", v.esd_window, "Grid points a crossing must persist");
    app.add_option("--axis", v.axis, "Swept parameter: r, theta, beta_sq, omega0 or lambda");
    app.add_option("--axis-min", v.axis_min, "First axis value");
    app.add_option("--axis-max", v.axis_max, "Last axis value");
    app.add_option("--axis-step", v.axis_step, "Axis increment");
    app.add_option("--cases", v.cases, "Randomized validation cases");
    app.add_option("--seed", v.seed, "Random seed for validation draws");
    app.add_option("--workers", v.workers, "Concurrent series computations");
    app.add_option("--out", v.out, "Output path (standard output when omitted)");
    app.set_config("--config", "", "Flat key = value file mirroring the flags above");

    CLI::App* series = app.add_subcommand("series", "Concurrence time series as CSV");
    CLI::App* sweep = app.add_subcommand("sweep", "Summary table over a parameter axis");
    CLI::App* figure = app.add_subcommand("figure", "Series stack for a published figure");
    CLI::App* validate = app.add_subcommand("validate", "Cross-check against direct integration");
    std::string preset_name;
    figure->add_option("preset", preset_name, "Preset name, fig1 through fig11")->required();
    for (CLI::App* sub : {series, sweep, figure, validate}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (series->parsed()) return run_series_command(v);
        if (sweep->parsed()) return run_sweep_command(v, app);
        if (figure->parsed()) return run_figure_command(v, preset_name);
        return run_validate_command(v);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
