// soliton_lab: integrate, scan and inspect the cohomogeneity-one soliton ODE.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "soliton/errors.hpp"
#include "soliton/geometry.hpp"
#include "soliton/integrator.hpp"
#include "soliton/io.hpp"
#include "soliton/shooting.hpp"
#include "soliton/warped.hpp"

using nlohmann::json;
using namespace soliton;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An output held in memory until it is written.
struct Output {
    std::string path;
    std::string data;
};

struct RunResult {
    int status = kExitOk;
    std::vector<Output> outputs;
    std::vector<std::string> notes;
    json preset;
    json config;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

template <typename T>
T need(const json& opts, const char* key) {
    if (!opts.contains(key)) throw UsageError(std::string("missing required option --") + key);
    try {
        return opts.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("option --") + key + " has the wrong type");
    }
}

OrbitPreset resolve_preset(const json& opts) {
    if (!opts.contains("preset")) throw UsageError("missing required option --preset");
    OrbitPreset p = opts.at("preset").get<OrbitPreset>();
    if (opts.contains("epsilon")) p.epsilon = opts.at("epsilon").get<double>();
    p.validate();
    return p;
}

IntegratorConfig resolve_config(const json& opts, const OrbitPreset& preset) {
    IntegratorConfig c = default_config(preset);
    c.step = opts.value("step", c.step);
    c.t_max = opts.value("tmax", c.t_max);
    c.blowup_threshold = opts.value("blowup_threshold", c.blowup_threshold);
    c.record_every = opts.value("record_every", c.record_every);
    c.extended_precision = opts.value("extended_precision", c.extended_precision);
    if (opts.contains("t0")) c.t0 = opts.at("t0").get<double>();
    c.validate();
    return c;
}

std::string csv_text(const auto& writer) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    writer(os);
    return os.str();
}

RunResult run_integrate(const json& opts) {
    const OrbitPreset preset = resolve_preset(opts);
    const IntegratorConfig config = resolve_config(opts, preset);
    const double hbar = need<double>(opts, "hbar");
    const double ubar = opts.value("ubar", 0.0);
    const auto traj = integrate(preset, hbar, ubar, config);

    RunResult r;
    r.preset = preset;
    r.config = to_json(config);
    r.outputs.push_back({opts.value("out", std::string("trajectory.csv")),
                         csv_text([&](std::ostream& os) { write_trajectory_csv(os, traj); })});
    std::cout << json{{"termination", to_string(traj.termination)},
                      {"end_time", traj.end_time},
                      {"min_sol", traj.min_sol},
                      {"argmin_sol_t", traj.argmin_sol_t},
                      {"turning_time", traj.turning_time ? json(*traj.turning_time) : json()},
                      {"winding_to_turning", traj.winding_to_turning ? json(*traj.winding_to_turning) : json()},
                      {"samples", traj.samples.size()}}
                     .dump(2)
              << '\n';
    return r;
}

RunResult run_scan(const json& opts) {
    const OrbitPreset preset = resolve_preset(opts);
    const IntegratorConfig config = resolve_config(opts, preset);
    ScanGrid grid{parse_range(need<std::string>(opts, "hbar_range")), parse_range(need<std::string>(opts, "ubar_range"))};
    const double threshold = opts.value("threshold", kDefaultSolThreshold);
    const std::string prefix = opts.value("out_prefix", std::string("scan"));

    RunResult r;
    r.notes = clamp_grid(grid, preset);
    for (const auto& n : r.notes) std::cerr << "warning: " << n << '\n';
    const auto result = scan(preset, grid, config, opts.value("threads", 0u));
    const auto clusters = find_clusters(result, threshold);

    r.preset = preset;
    r.config = to_json(config);
    r.outputs.push_back({prefix + ".scan.csv", csv_text([&](std::ostream& os) { write_scan_csv(os, result); })});
    r.outputs.push_back({prefix + ".clusters.json", clusters_json(clusters, threshold).dump(2) + "\n"});
    if (opts.value("svg", false)) r.outputs.push_back({prefix + ".svg", scan_svg(result, threshold)});
    std::cout << clusters_json(clusters, threshold).dump(2) << '\n';
    return r;
}

RunResult run_slice(const json& opts) {
    const OrbitPreset preset = resolve_preset(opts);
    const IntegratorConfig config = resolve_config(opts, preset);
    const auto slice = einstein_slice(preset, parse_range(need<std::string>(opts, "hbar_range")), config,
                                      opts.value("threads", 0u));
    RunResult r;
    r.preset = preset;
    r.config = to_json(config);
    r.outputs.push_back({opts.value("out_prefix", std::string("slice")) + ".slice.csv",
                         csv_text([&](std::ostream& os) { write_slice_csv(os, slice); })});
    json minima = json::array();
    for (const auto& m : slice_minima(slice)) minima.push_back({{"hbar", m.hbar}, {"min_sol", m.min_sol}});
    std::cout << json{{"minima", minima}}.dump(2) << '\n';
    return r;
}

RunResult run_refine(const json& opts) {
    const OrbitPreset preset = resolve_preset(opts);
    const IntegratorConfig config = resolve_config(opts, preset);
    RefineOptions ro;
    ro.hbar_width = opts.value("hbar_width", ro.hbar_width);
    ro.ubar_width = opts.value("ubar_width", ro.ubar_width);
    ro.fix_ubar = opts.value("fix_ubar", ro.fix_ubar);
    ro.max_evaluations = opts.value("max_evaluations", ro.max_evaluations);
    ro.sweeps = opts.value("sweeps", ro.sweeps);
    const auto res = refine(preset, need<double>(opts, "hbar"), opts.value("ubar", 0.0), config, ro);
    std::cout << json{{"hbar", res.hbar},
                      {"ubar", res.ubar},
                      {"min_sol", res.min_sol},
                      {"seed_min_sol", res.seed_min_sol},
                      {"evaluations", res.evaluations},
                      {"budget_exhausted", res.budget_exhausted}}
                     .dump(2)
              << '\n';
    RunResult r;
    r.preset = preset;
    r.config = to_json(config);
    return r;
}

// "2,3" gives round spheres; "2:1.5,3:2" gives d:lambda pairs.
WarpedPreset parse_factors(const std::string& text, double epsilon) {
    WarpedPreset p;
    p.epsilon = epsilon;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        try {
            WarpedFactor f;
            f.d = std::stoi(item.substr(0, colon));
            f.lambda = colon == std::string::npos ? f.d - 1.0 : std::stod(item.substr(colon + 1));
            p.factors.push_back(f);
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse factor '" + item + "' (expected d or d:lambda)");
        }
    }
    p.validate();
    return p;
}

RunResult run_verify(const json& opts) {
    constexpr double kResidualTol = 1e-10;
    constexpr double kTrackTol = 1e-4;
    const OracleKind kind = oracle_kind_from_string(need<std::string>(opts, "oracle"));
    const WarpedPreset wp = parse_factors(need<std::string>(opts, "factors"), opts.value("epsilon", -1.0));
    const int n = wp.n();
    RunResult r;

    if (opts.contains("at")) {
        const auto o = oracle(wp, kind, opts.at("at").get<double>());
        json g = o.jet.g;
        std::cout << json{{"t", o.jet.t}, {"g", g}, {"u", o.jet.u}, {"xi", o.xi}, {"E", o.E}}.dump(2) << '\n';
        return r;
    }

    double t_end = opts.value("tmax", 1.0);
    if (kind == OracleKind::SphericalCone)
        t_end = std::min(t_end, 0.99 * std::numbers::pi / std::sqrt(-wp.epsilon / (2.0 * n)));
    const int samples = opts.value("samples", 100);

    double ode = 0.0, ham = 0.0, cons = 0.0, phase = 0.0, cons2 = 0.0;
    for (int k = 1; k <= samples; ++k) {
        const double t = t_end * k / samples;
        const auto o = oracle(wp, kind, t);
        for (double v : tangential_residuals(wp, o.jet)) ode = std::max(ode, std::abs(v));
        ode = std::max(ode, std::abs(jet_normal_residual(wp, o.jet)));
        ham = std::max(ham, std::abs(jet_ham_residual(wp, o.jet)));
        cons = std::max(cons, std::abs(jet_conservation_residual(wp, o.jet)));
        if (std::abs(o.xi) > 1e-3) {
            const auto ph = phase_from_jet(wp, o.jet);
            const auto a = phase_rate_from_jet(wp, o.jet);
            const auto b = warped_rhs(wp, ph);
            const double scale = 1.0 + std::abs(ph.W * ph.W * ph.W);
            phase = std::max(phase, std::abs(a.W - b.W) / scale);
            for (std::size_t i = 0; i < wp.m(); ++i)
                phase = std::max({phase, std::abs(a.X[i] - b.X[i]) / scale, std::abs(a.Y[i] - b.Y[i]) / scale});
            cons2 = std::max(cons2, std::abs(cons2_residual(wp, ph, o.E)) / scale);
        }
    }
    json report{{"oracle", need<std::string>(opts, "oracle")},
                {"n", n},
                {"epsilon", wp.epsilon},
                {"samples", samples},
                {"t_end", t_end},
                {"max_ode_residual", ode},
                {"max_ham_residual", ham},
                {"max_conservation_residual", cons},
                {"max_phase_residual", phase},
                {"max_cons2_residual", cons2}};
    bool ok = ode < kResidualTol && ham < kResidualTol && cons < kResidualTol && phase < kResidualTol &&
              cons2 < kResidualTol;

    // The two-factor smooth Gaussian is also integrated through the z-system.
    if (kind == OracleKind::SmoothGaussian && wp.m() == 2) {
        OrbitPreset p{"gaussian", wp.factors[0].d, wp.factors[1].d, wp.factors[1].lambda, 0.0, wp.epsilon,
                      CollapsePattern::SameEnd};
        IntegratorConfig c;
        c.step = opts.value("step", 0.005);
        c.t_max = opts.value("track_tmax", 5.0);
        const double track_arc = opts.value("track_arc", 0.5);
        const double hbar = std::sqrt(-2.0 * wp.factors[1].lambda / wp.epsilon);
        const double ubar = -0.5 * (wp.factors[0].d + 1);
        const auto traj = integrate(p, hbar, ubar, c);
        double dev_arc = 0.0, dev_all = 0.0;
        std::optional<double> leave_time;
        for (const auto& s : traj.samples) {
            const auto o = oracle(wp, kind, s.state.t);
            const double dev = std::max({std::abs(s.state.f - o.jet.g[0]), std::abs(s.state.fdot - o.jet.gdot[0]),
                                         std::abs(s.state.h - o.jet.g[1]), std::abs(s.state.hdot - o.jet.gdot[1]),
                                         std::abs(s.state.u - o.jet.u), std::abs(s.state.udot - o.jet.udot)});
            if (s.state.t <= track_arc) dev_arc = std::max(dev_arc, dev);
            if (!leave_time && dev > kTrackTol) leave_time = s.state.t;
            dev_all = std::max(dev_all, dev);
        }
        report["track_arc"] = track_arc;
        report["max_deviation_on_arc"] = dev_arc;
        report["max_deviation"] = dev_all;
        report["deviation_exceeds_tolerance_at"] = leave_time ? json(*leave_time) : json();
        report["termination"] = to_string(traj.termination);
        report["end_time"] = traj.end_time;
        ok = ok && dev_arc <= kTrackTol;
    }
    report["pass"] = ok;
    std::cout << report.dump(2) << '\n';
    r.status = ok ? kExitOk : kExitFailure;
    return r;
}

RunResult run_linearize(const json& opts) {
    const int lo = opts.value("n_min", opts.value("n", 4));
    const int hi = opts.value("n_max", opts.value("n", lo));
    json list = json::array();
    for (int n = lo; n <= hi; ++n) {
        const auto lin = p_plus_linearization(n);
        json eig = json::array();
        for (const auto& e : lin.eigenvalues) eig.push_back({{"re", e.real()}, {"im", e.imag()}});
        list.push_back({{"n", n},
                        {"matrix", lin.matrix},
                        {"eigenvalues", eig},
                        {"discriminant", lin.discriminant},
                        {"is_focus", lin.is_focus}});
    }
    std::cout << list.dump(2) << '\n';
    return {};
}

RunResult run_presets(const json&) {
    json list = json::array();
    for (const auto& name : preset_names()) list.push_back(preset_catalog(name));
    std::cout << list.dump(2) << '\n';
    return {};
}

using Runner = RunResult (*)(const json&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table{
        {"integrate", run_integrate}, {"scan", run_scan},           {"slice", run_slice},
        {"refine", run_refine},       {"verify", run_verify},       {"linearize", run_linearize},
        {"presets", run_presets}};
    return table;
}

bool writes_manifest(const std::string& command) {
    return command == "integrate" || command == "scan" || command == "slice";
}

std::string manifest_path(const std::string& command, const json& opts) {
    if (opts.contains("manifest")) return opts.at("manifest").get<std::string>();
    if (command == "integrate") return opts.value("out", std::string("trajectory.csv")) + ".manifest.json";
    return opts.value("out_prefix", std::string(command)) + ".manifest.json";
}

int execute(const std::string& command, const json& opts) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r = runners().at(command)(opts);
    RunManifest m;
    m.command = command;
    m.options = opts;
    m.preset = r.preset;
    m.config = r.config;
    m.notes = r.notes;
    for (const auto& o : r.outputs) m.outputs.push_back(write_output(o.path, o.data));
    m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (writes_manifest(command)) write_output(manifest_path(command, opts), to_json(m).dump(2) + "\n");
    return r.status;
}

int rerun(const std::string& path, bool write) {
    const RunManifest m = manifest_from_json(read_json_file(path));
    if (!runners().count(m.command)) throw UsageError("manifest names an unknown command '" + m.command + "'");
    RunResult r = runners().at(m.command)(m.options);
    bool identical = r.outputs.size() == m.outputs.size();
    for (std::size_t i = 0; i < r.outputs.size(); ++i) {
        const std::string digest = sha256_hex(r.outputs[i].data);
        const bool same = i < m.outputs.size() && m.outputs[i].sha256 == digest;
        std::cerr << (same ? "identical " : "DIFFERS   ") << r.outputs[i].path << '\n';
        identical = identical && same;
        if (write) write_output(r.outputs[i].path, r.outputs[i].data);
    }
    return identical ? kExitOk : kExitFailure;
}

// Collects the options given on the command line into the flat JSON form
// shared with --config files and manifests.
class OptionSet {
public:
    explicit OptionSet(CLI::App* app) : app_(app) {
        app_->add_option("--config", config_path_, "JSON file with option values; flags override it");
    }

    template <typename T>
    void add(const std::string& flag, const std::string& help) {
        auto value = std::make_shared<T>();
        auto* opt = app_->add_option(flag, *value, help);
        const std::string key = key_of(flag);
        setters_.push_back([opt, value, key](json& j) {
            if (opt->count() > 0) j[key] = *value;
        });
    }

    void flag(const std::string& flag, const std::string& help) {
        auto value = std::make_shared<bool>(false);
        auto* opt = app_->add_flag(flag, *value, help);
        const std::string key = key_of(flag);
        setters_.push_back([opt, value, key](json& j) {
            if (opt->count() > 0) j[key] = *value;
        });
    }

    json resolve() const {
        json j = config_path_.empty() ? json::object() : read_json_file(config_path_);
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& set : setters_) set(j);
        return j;
    }

    CLI::App* app() const { return app_; }

private:
    static std::string key_of(const std::string& flag) {
        std::string k = flag.substr(2);
        for (char& c : k)
            if (c == '-') c = '_';
        return k;
    }

    CLI::App* app_;
    std::string config_path_;
    std::vector<std::function<void(json&)>> setters_;
};

void add_preset_options(OptionSet& s) {
    s.add<std::string>("--preset", "preset name: cp2, s5, s2xs3, s2xs2, s11, hp(k), f(k), cap2");
    s.add<double>("--epsilon", "override the soliton constant");
}

void add_integrator_options(OptionSet& s) {
    s.add<double>("--step", "RK4 step (default 0.005)");
    s.add<double>("--tmax", "final time (default 50/sqrt(-eps))");
    s.add<double>("--t0", "series handoff time (default 10 steps)");
    s.add<double>("--blowup-threshold", "blow-up bound on |z_i| (default 1e8)");
    s.flag("--extended-precision", "carry the series and RK4 in long double");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for cohomogeneity-one gradient Ricci solitons"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::vector<std::pair<std::string, std::unique_ptr<OptionSet>>> sets;
    auto make = [&](const std::string& name, const std::string& help) -> OptionSet& {
        sets.emplace_back(name, std::make_unique<OptionSet>(app.add_subcommand(name, help)));
        return *sets.back().second;
    };

    auto& integ = make("integrate", "integrate one trajectory and write it as CSV");
    add_preset_options(integ);
    add_integrator_options(integ);
    integ.add<double>("--hbar", "initial base scale h(0)");
    integ.add<double>("--ubar", "initial potential u(0) (default 0)");
    integ.add<int>("--record-every", "keep every k-th step (default 1)");
    integ.add<std::string>("--out", "trajectory CSV path (default trajectory.csv)");
    integ.add<std::string>("--manifest", "manifest path (default <out>.manifest.json)");

    auto& sc = make("scan", "min-SOL scan over an (hbar, ubar) grid");
    add_preset_options(sc);
    add_integrator_options(sc);
    sc.add<std::string>("--hbar-range", "lo:hi:step");
    sc.add<std::string>("--ubar-range", "lo:hi:step");
    sc.add<double>("--threshold", "cluster threshold on min SOL (default 0.005)");
    sc.add<std::string>("--out-prefix", "prefix for .scan.csv, .clusters.json, .svg, .manifest.json");
    sc.add<unsigned>("--threads", "worker threads (default: all cores)");
    sc.flag("--svg", "also write a scatter plot of sub-threshold cells");

    auto& sl = make("slice", "min-SOL profile along the Einstein axis ubar = 0");
    add_preset_options(sl);
    add_integrator_options(sl);
    sl.add<std::string>("--hbar-range", "lo:hi:step");
    sl.add<std::string>("--out-prefix", "prefix for .slice.csv and .manifest.json");
    sl.add<unsigned>("--threads", "worker threads (default: all cores)");

    auto& rf = make("refine", "golden-section descent of min SOL from a seed");
    add_preset_options(rf);
    add_integrator_options(rf);
    rf.add<double>("--hbar", "seed hbar");
    rf.add<double>("--ubar", "seed ubar (default 0)");
    rf.add<double>("--hbar-width", "initial half-width in hbar");
    rf.add<double>("--ubar-width", "initial half-width in ubar");
    rf.add<int>("--max-evaluations", "evaluation budget");
    rf.add<int>("--sweeps", "coordinate sweeps");
    rf.flag("--fix-ubar", "search along hbar only");

    auto& vf = make("verify", "check a closed-form soliton against the equations");
    vf.add<std::string>("--oracle", "gaussian | conical | cone");
    vf.add<std::string>("--factors", "factor dimensions, e.g. 2,2 or d:lambda pairs 2:1,3:2");
    vf.add<double>("--epsilon", "soliton constant (default -1)");
    vf.add<double>("--tmax", "sample times up to this value (default 1)");
    vf.add<int>("--samples", "number of sample times (default 100)");
    vf.add<double>("--at", "evaluate the closed form at one time and print it");
    vf.add<double>("--step", "RK4 step for the Gaussian tracking run");
    vf.add<double>("--track-arc", "arc on which the integrated Gaussian must match (default 0.5)");

    auto& ln = make("linearize", "linearization at P+ and the focus criterion");
    ln.add<int>("--n", "dimension n");
    ln.add<int>("--n-min", "first n of a range");
    ln.add<int>("--n-max", "last n of a range");

    make("presets", "list the preset catalog");

    auto* rr = app.add_subcommand("rerun", "recompute the outputs of a manifest and compare digests");
    std::string manifest;
    bool write = false;
    rr->add_option("--manifest", manifest, "manifest JSON")->required();
    rr->add_flag("--write", write, "overwrite the recorded output files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (rr->parsed()) return rerun(manifest, write);
        for (const auto& [name, set] : sets)
            if (set->app()->parsed()) return execute(name, set->resolve());
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const LookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const OracleDomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
