// jscat: scattering data, Wiener-algebra reports, propagator decay fits,
// resonance projectors and van der Corput checks for compactly supported
// Jacobi operators.
//
// Exit codes: 0 success, 1 a numerical tolerance was not met, 2 configuration error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jscat/evolution.hpp"
#include "jscat/operator_io.hpp"
#include "jscat/scattering.hpp"
#include "jscat/wiener.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jscat;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_config = 2;

struct Flags {
    std::string config;
    std::string out = "out";
    std::optional<int> grid;
    std::optional<double> tmin, tmax;
    std::optional<int> tpoints;
    std::optional<std::string> norm;
    bool subtract_leading = false;
    std::optional<double> tol;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "experiment config (JSON)");
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--grid", f.grid, "circle grid size M");
    cmd->add_option("--tol", f.tol, "tolerance that decides exit code 1");
}

void add_times(CLI::App* cmd, Flags& f) {
    cmd->add_option("--tmin", f.tmin, "smallest time");
    cmd->add_option("--tmax", f.tmax, "largest time");
    cmd->add_option("--tpoints", f.tpoints, "number of log-spaced times");
}

json load_config(const Flags& f) {
    if (f.config.empty()) return json::object();
    json j = read_json_file(f.config);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
}

json section(const json& config, const char* name) {
    if (!config.contains(name)) return json::object();
    const json& s = config.at(name);
    if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
    return s;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

// "operator": inline spec | "path.json" | {"random": {"seed", "support", "amplitude"}}
JacobiOperator config_operator(const json& config, const Flags& f) {
    if (!config.contains("operator")) throw ConfigError("config needs an 'operator' entry (use --config)");
    const json& spec = config.at("operator");
    if (spec.is_string()) {
        fs::path p = spec.get<std::string>();
        if (p.is_relative() && !f.config.empty()) p = fs::path(f.config).parent_path() / p;
        return load_operator(p.string());
    }
    if (spec.is_object() && spec.contains("random")) {
        const json& r = spec.at("random");
        return random_compact_operator(get_or<std::uint64_t>(r, "seed", 1), get_or<int>(r, "support", 3),
                                       get_or<double>(r, "amplitude", 0.4));
    }
    return operator_from_json(spec);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json cnum(complex v) { return json::array({v.real(), v.imag()}); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path out_dir(const Flags& f) {
    fs::path dir = f.out;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

json resonance_json(const ResonanceReport& r) {
    json j = {{"z_hat", r.z_hat},
              {"resonant", r.is_resonant},
              {"wronskian", cnum(r.wronskian_value)},
              {"wronskian_scale", r.wronskian_scale},
              {"transmission", cnum(r.transmission)},
              {"reflection_plus", cnum(r.reflection_plus)},
              {"reflection_minus", cnum(r.reflection_minus)},
              {"transmission_limit", cnum(r.transmission_limit)},
              {"reflection_plus_limit", cnum(r.reflection_plus_limit)},
              {"reflection_minus_limit", cnum(r.reflection_minus_limit)},
              {"continuity_gap", r.continuity_gap},
              {"identity_residual", r.max_identity_residual()},
              {"ill_conditioned", r.ill_conditioned}};
    j["gamma"] = r.gamma ? json(*r.gamma) : json(nullptr);
    if (r.gamma) {
        j["gamma_imag"] = r.gamma_imag;
        j["proportionality_residual"] = r.proportionality_residual;
    }
    return j;
}

int cmd_scatter(const Flags& f) {
    const json config = load_config(f);
    const json s = section(config, "scatter");
    const auto op = config_operator(config, f);
    const int grid = f.grid.value_or(get_or<int>(s, "grid", 512));
    const double tol = f.tol.value_or(get_or<double>(s, "tol", 1e-10));
    const int window = get_or<int>(s, "relation_window", 10);
    const auto data = scattering_matrix(op, grid, get_or<double>(s, "resonance_tol", 1e-8));
    const double unitarity = data.unitarity_residual();
    const double relation = scattering_relation_residual(op, data, window);

    std::string csv = "theta,re_T,im_T,re_Rp,im_Rp,re_Rm,im_Rm,unitarity_plus,unitarity_minus\n";
    for (int m = 0; m < grid; ++m) {
        const auto i = static_cast<std::size_t>(m);
        const double t2 = std::norm(data.transmission[i]);
        csv += num(data.theta[i]) + "," + num(data.transmission[i].real()) + "," + num(data.transmission[i].imag()) +
               "," + num(data.reflection_plus[i].real()) + "," + num(data.reflection_plus[i].imag()) + "," +
               num(data.reflection_minus[i].real()) + "," + num(data.reflection_minus[i].imag()) + "," +
               num(t2 + std::norm(data.reflection_plus[i]) - 1.0) + "," +
               num(t2 + std::norm(data.reflection_minus[i]) - 1.0) + "\n";
    }
    const fs::path dir = out_dir(f);
    write_text(dir / "scatter.csv", csv);
    const bool ok = unitarity < tol && relation < tol;
    write_json(dir / "resonances.json", {{"operator", operator_to_json(op)},
                                         {"grid", grid},
                                         {"unitarity_residual", unitarity},
                                         {"relation_residual", relation},
                                         {"relation_window", window},
                                         {"tol", tol},
                                         {"within_tol", ok},
                                         {"edges", json::array({resonance_json(data.resonances[0]),
                                                                resonance_json(data.resonances[1])})}});
    std::cout << "unitarity " << num(unitarity) << "  relation " << num(relation) << "\n";
    for (const auto& r : data.resonances)
        std::cout << "z_hat " << r.z_hat << ": " << (r.is_resonant ? "resonant" : "non-resonant") << "\n";
    return ok ? exit_ok : exit_tolerance;
}

int cmd_wiener(const Flags& f) {
    const json config = load_config(f);
    const json s = section(config, "wiener");
    const auto op = config_operator(config, f);
    MembershipOptions opt;
    opt.l_max = get_or<int>(s, "l_max", opt.l_max);
    if (s.contains("grids") && s.at("grids") == "auto")
        opt.grids = resolving_grids(op, opt.l_max);
    else
        opt.grids = get_or<std::vector<int>>(s, "grids", opt.grids);
    if (f.grid) opt.grids = {*f.grid / 4, *f.grid / 2, *f.grid};
    opt.sampled_n = get_or<std::vector<int>>(s, "sampled_n", opt.sampled_n);
    if (s.contains("moment_order") && !s.at("moment_order").is_null()) opt.moment_order = get_or<double>(s, "moment_order", 0.0);
    opt.tail_threshold = f.tol.value_or(get_or<double>(s, "tail_threshold", opt.tail_threshold));
    const auto reports = membership_report(op, opt);

    json rows = json::array();
    int inconclusive = 0;
    for (const auto& r : reports)
        for (const auto& o : r.orders) {
            if (o.verdict != Verdict::summable) ++inconclusive;
            for (const auto& g : o.grids)
                rows.push_back({{"quantity", r.quantity},
                                {"l", o.l},
                                {"M", g.grid_size},
                                {"wiener_norm", g.wiener_norm},
                                {"tail_fraction", g.tail_fraction},
                                {"verdict", verdict_name(o.verdict)},
                                {"note", o.note}});
        }
    json bounds = json::array();
    for (Side side : {Side::plus, Side::minus}) {
        const int lo = side == Side::plus ? -1 : -op.support_radius() - 10;
        const int hi = side == Side::plus ? op.support_radius() + 10 : 1;
        const auto k = verify_kernel_bound(op, side, lo, hi);
        json aux = json::array();
        for (double z_hat : {1.0, -1.0}) {
            const auto a = resonance_auxiliary(op, side, z_hat);
            aux.push_back({{"z_hat", z_hat},
                           {"bound_constant", std::isfinite(a.bound_constant) ? json(a.bound_constant) : json(nullptr)},
                           {"violations", a.bound_violations},
                           {"boundary_value", a.boundary_value},
                           {"factorization_residual", a.factorization_residual}});
        }
        bounds.push_back({{"side", side_name(side)},
                          {"kernel_bound_constant", std::isfinite(k.uniform_constant) ? json(k.uniform_constant) : json(nullptr)},
                          {"kernel_bound_violations", k.violations},
                          {"h_bound", aux}});
    }
    const double rho = coefficient_decay_radius(op);
    const fs::path dir = out_dir(f);
    write_json(dir / "wiener.json", {{"operator", operator_to_json(op)},
                                     {"grids", opt.grids},
                                     {"l_max", opt.l_max},
                                     {"tail_threshold", opt.tail_threshold},
                                     {"coefficient_decay_radius", std::isfinite(rho) ? json(rho) : json(nullptr)},
                                     {"inconclusive", inconclusive},
                                     {"rows", rows},
                                     {"bounds", bounds}});
    std::cout << reports.size() << " quantities, " << inconclusive << " inconclusive order(s)";
    if (std::isfinite(rho)) std::cout << ", nearest zero of W outside the disk at |z| = " << num(rho);
    std::cout << "\n";
    // Inconclusive verdicts are a finding, not a failure.
    return exit_ok;
}

int cmd_evolve(const Flags& f) {
    const json config = load_config(f);
    const json s = section(config, "evolve");
    const auto op = config_operator(config, f);
    DecayOptions opt;
    opt.norm = KernelNorm::parse(f.norm.value_or(get_or<std::string>(s, "norm", "sup")));
    const double tmin = f.tmin.value_or(get_or<double>(s, "tmin", 50.0));
    const double tmax = f.tmax.value_or(get_or<double>(s, "tmax", 800.0));
    const int tpoints = f.tpoints.value_or(get_or<int>(s, "tpoints", 10));
    opt.times = log_time_grid(tmin, tmax, tpoints);
    opt.subtract_leading = f.subtract_leading || get_or<bool>(s, "subtract_leading", false);
    opt.margin = get_or<int>(s, "margin", opt.margin);
    opt.spot_check = get_or<bool>(s, "spot_check", false);
    opt.spot_window = get_or<int>(s, "spot_window", opt.spot_window);
    opt.spot_tol = f.tol.value_or(get_or<double>(s, "spot_tol", opt.spot_tol));
    if (s.contains("window")) {
        const json& w = s.at("window");
        opt.policy = WindowPolicy{get_or<int>(w, "base", 40), get_or<double>(w, "slope", 0.0)};
    }
    const auto fit = decay_fit(op, opt);

    std::string csv = "t,window,norm,norm_minus_leading\n";
    for (std::size_t i = 0; i < fit.times.size(); ++i)
        csv += num(fit.times[i]) + "," + std::to_string(fit.windows[i]) + "," + num(fit.norms[i]) + "," +
               num(fit.norms_after[i]) + "\n";
    const fs::path dir = out_dir(f);
    write_text(dir / "decay.csv", csv);
    json j = {{"operator", operator_to_json(op)},
              {"norm", fit.norm.name()},
              {"subtract_leading", fit.subtract_leading},
              {"exponent", fit.exponent},
              {"stderr", fit.stderr_},
              {"intercept", fit.intercept}};
    bool ok = true;
    if (fit.spot_check) {
        const auto& c = *fit.spot_check;
        j["spot_check"] = {{"t", c.t}, {"window", c.window}, {"max_difference", c.max_difference}, {"tol", opt.spot_tol},
                           {"passed", c.passed}};
        write_text(dir / "spot_check.csv", "t,window,max_difference,tol,passed\n" + num(c.t) + "," +
                                               std::to_string(c.window) + "," + num(c.max_difference) + "," +
                                               num(opt.spot_tol) + "," + (c.passed ? "1" : "0") + "\n");
        ok = c.passed;
    }
    write_json(dir / "fit.json", j);
    const int column = fit.subtract_leading ? 4 : 3;
    write_text(dir / "decay.gp", "set datafile separator ','\nset logscale xy\nset key top right\n"
                                 "set xlabel 't'\nset ylabel '" +
                                     fit.norm.name() + "'\nf(x) = exp(" + num(fit.intercept) + ") * x**(" +
                                     num(fit.exponent) + ")\nplot 'decay.csv' every ::1 using 1:" +
                                     std::to_string(column) + " with points title 'measured', f(x) title 'fit'\n");
    std::cout << fit.norm.name() << (fit.subtract_leading ? " (leading term removed)" : "") << ": exponent "
              << num(fit.exponent) << " +- " << num(fit.stderr_) << "\n";
    if (fit.spot_check) std::cout << "spot check max difference " << num(fit.spot_check->max_difference) << "\n";
    return ok ? exit_ok : exit_tolerance;
}

int cmd_projectors(const Flags& f) {
    const json config = load_config(f);
    const json s = section(config, "projectors");
    const auto op = config_operator(config, f);
    const int window = get_or<int>(s, "window", 10);
    const double tol = f.tol.value_or(get_or<double>(s, "tol", 1e-10));
    const auto proj = resonance_projectors(op, window, get_or<double>(s, "resonance_tol", 1e-8), f.grid.value_or(512));
    const fs::path dir = out_dir(f);
    json list = json::array();
    bool ok = true;
    for (const auto* p : {&proj.plus_one, &proj.minus_one}) {
        if (!*p) continue;
        const auto& k = **p;
        ok = ok && k.eigen_residual < tol && k.construction_residual < tol;
        const std::string name = k.z_hat > 0 ? "projector_plus.csv" : "projector_minus.csv";
        std::string csv = "n,k,value\n";
        for (int n = -window; n <= window; ++n)
            for (int m = -window; m <= window; ++m)
                csv += std::to_string(n) + "," + std::to_string(m) + "," + num(k(n, m)) + "\n";
        write_text(dir / name, csv);
        list.push_back({{"z_hat", k.z_hat},
                        {"gamma", k.gamma},
                        {"transmission", k.transmission},
                        {"eigen_residual", k.eigen_residual},
                        {"construction_residual", k.construction_residual},
                        {"file", name}});
    }
    write_json(dir / "projectors.json",
               {{"operator", operator_to_json(op)}, {"window", window}, {"tol", tol}, {"projectors", list}});
    if (list.empty()) std::cout << "no resonance at +-1: the leading term vanishes\n";
    for (const auto& p : list)
        std::cout << "z_hat " << p["z_hat"].get<double>() << ": gamma " << num(p["gamma"].get<double>())
                  << ", eigen residual " << num(p["eigen_residual"].get<double>()) << "\n";
    return ok ? exit_ok : exit_tolerance;
}

int cmd_vdc(const Flags& f) {
    const json config = load_config(f);
    const json s = section(config, "vdc");
    const double pi = std::numbers::pi;
    const double tmin = f.tmin.value_or(get_or<double>(s, "tmin", 1.0));
    const double tmax = f.tmax.value_or(get_or<double>(s, "tmax", 1e4));
    const int tpoints = f.tpoints.value_or(get_or<int>(s, "tpoints", 25));
    const double growth_tol = f.tol.value_or(get_or<double>(s, "growth_tol", 0.05));
    // f = 1 unless "amplitude" lists Fourier coefficients [[m, re, im], ...]
    FourierSeries amplitude(0, {1.0});
    if (s.contains("amplitude")) {
        std::map<int, complex> c;
        for (const auto& e : s.at("amplitude")) {
            if (!e.is_array() || e.size() < 2) throw ConfigError("vdc amplitude entries are [m, re] or [m, re, im]");
            c[e[0].get<int>()] = complex(e[1].get<double>(), e.size() > 2 ? e[2].get<double>() : 0.0);
        }
        if (c.empty()) throw ConfigError("vdc amplitude needs at least one coefficient");
        std::vector<complex> v(static_cast<std::size_t>(c.rbegin()->first - c.begin()->first + 1), 0.0);
        for (const auto& [m, x] : c) v[static_cast<std::size_t>(m - c.begin()->first)] = x;
        amplitude = FourierSeries(c.begin()->first, std::move(v));
    }
    struct Interval {
        int order;
        double a, b;
    };
    // the split used for -cos: |v''| >= cos(pi/4) near 0 and pi, |v'''| >= sin(pi/4) near +-pi/2
    std::vector<Interval> intervals{{2, -pi / 4, pi / 4}, {3, pi / 4, pi / 2}};
    if (s.contains("intervals")) {
        intervals.clear();
        for (const auto& e : s.at("intervals"))
            intervals.push_back({get_or<int>(e, "order", 2), get_or<double>(e, "a", 0.0), get_or<double>(e, "b", 0.0)});
    }
    const auto times = log_time_grid(tmin, tmax, tpoints);
    std::string csv = "order,a,b,t,magnitude,ratio\n";
    json list = json::array();
    bool ok = true;
    for (const auto& iv : intervals) {
        const auto r = vdc_bound_check(Phase::minus_cosine(), amplitude, iv.order, iv.a, iv.b, times, growth_tol);
        for (std::size_t i = 0; i < r.times.size(); ++i)
            csv += std::to_string(r.order) + "," + num(r.a) + "," + num(r.b) + "," + num(r.times[i]) + "," +
                   num(r.magnitudes[i]) + "," + num(r.ratios[i]) + "\n";
        list.push_back({{"order", r.order},
                        {"a", r.a},
                        {"b", r.b},
                        {"m_j", r.m_j},
                        {"amplitude_norm", r.amplitude_norm},
                        {"empirical_constant", r.empirical_constant},
                        {"tail_slope", r.tail_slope},
                        {"bounded", r.bounded}});
        ok = ok && r.bounded;
        std::cout << "j=" << r.order << " [" << num(r.a) << ", " << num(r.b) << "]: C = " << num(r.empirical_constant)
                  << (r.bounded ? " (bounded)" : " (growing)") << "\n";
    }
    const fs::path dir = out_dir(f);
    write_text(dir / "vdc.csv", csv);
    write_json(dir / "vdc.json", {{"phase", "-cos"}, {"growth_tol", growth_tol}, {"checks", list}});
    return ok ? exit_ok : exit_tolerance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scattering theory and dispersive estimates for Jacobi operators"};
    app.require_subcommand(1);
    Flags flags;

    auto* scatter = app.add_subcommand("scatter", "T, R+- on the circle grid and the edge resonance report");
    add_common(scatter, flags);
    auto* wiener = app.add_subcommand("wiener", "Wiener-algebra membership report");
    add_common(wiener, flags);
    auto* evolve = app.add_subcommand("evolve", "propagator norms and decay exponent fit");
    add_common(evolve, flags);
    add_times(evolve, flags);
    evolve->add_option("--norm", flags.norm, "sup | wsup2 | wsup:SIGMA | w2:SIGMA");
    evolve->add_flag("--subtract-leading", flags.subtract_leading, "remove the resonant t^{-1/2} term before fitting");
    auto* projectors = app.add_subcommand("projectors", "rank-one projectors onto the edge resonances");
    add_common(projectors, flags);
    auto* vdc = app.add_subcommand("vdc", "empirical van der Corput constants for the phase -cos");
    add_common(vdc, flags);
    add_times(vdc, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        if (*scatter) return cmd_scatter(flags);
        if (*wiener) return cmd_wiener(flags);
        if (*evolve) return cmd_evolve(flags);
        if (*projectors) return cmd_projectors(flags);
        if (*vdc) return cmd_vdc(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const GridError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NotResonant& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_tolerance;
    }
    return exit_config;
}
