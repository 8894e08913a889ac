#include "app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopcool/limits.hpp"
#include "loopcool/modes.hpp"
#include "loopcool/parallel.hpp"
#include "loopcool/spectra.hpp"
#include "loopcool/steadystate.hpp"

namespace loopcool::cli {

namespace {

using nlohmann::json;

const char* normalizer_note = "resonant t_max = 4(sqrt(C1 C2)+sqrt(C3))^2/(C1+C2+C3+1)^2 reused at every omega";

struct Options {
    std::vector<std::string> configs;
    std::string preset;
    std::vector<std::string> sets;
    std::string out;
    std::string sweep_file;
    bool om_rwa = false, om_full = false, mech_rwa = false, mech_full = false;
    int workers = 0;
    std::optional<double> omega_min, omega_max;
    std::optional<int> points;
    std::optional<double> l_eta, l_theta, l_delta, l_omega1, l_omega2, l_omega_b;
    int theta_points = 0;
};

std::string timestamp_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Resolved load(const Options& o) {
    Config cfg;
    if (!o.preset.empty()) {
        auto it = presets().find(o.preset);
        if (it == presets().end()) {
            std::string names;
            for (const auto& [k, v] : presets()) names += (names.empty() ? "" : ", ") + k;
            throw ConfigError("unknown preset '" + o.preset + "' (available: " + names + ")");
        }
        cfg.merge_text(it->second, "preset " + o.preset);
    }
    for (const auto& path : o.configs) cfg.merge_text(read_file(path), path);
    if (!o.sweep_file.empty()) cfg.merge_text(read_file(o.sweep_file), o.sweep_file);
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        auto trim = [](std::string x) {
            while (!x.empty() && std::isspace(static_cast<unsigned char>(x.back()))) x.pop_back();
            while (!x.empty() && std::isspace(static_cast<unsigned char>(x.front()))) x.erase(x.begin());
            return x;
        };
        cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), "--set");
    }
    Resolved r = resolve(cfg);
    if (o.om_rwa) r.approx.optomechanical = Coupling::RWA;
    if (o.om_full) r.approx.optomechanical = Coupling::FULL;
    if (o.mech_rwa) r.approx.mechanical = Coupling::RWA;
    if (o.mech_full) r.approx.mechanical = Coupling::FULL;
    if (r.sweep) r.sweep->approx = r.approx;
    if (o.workers > 0) r.workers = o.workers;
    if (o.omega_min) r.spectrum.omega_min = *o.omega_min;
    if (o.omega_max) r.spectrum.omega_max = *o.omega_max;
    if (o.points) r.spectrum.points = *o.points;
    if (r.spectrum.points < 2) throw ConfigError("spectrum needs at least 2 points");
    if (!(r.spectrum.omega_max > r.spectrum.omega_min)) throw ConfigError("spectrum range is empty");
    if (o.l_omega1) r.lambda.omega1 = *o.l_omega1;
    if (o.l_omega2) r.lambda.omega2 = *o.l_omega2;
    if (o.l_eta) r.lambda.omega_b = *o.l_eta * r.lambda.omega1;
    if (o.l_omega_b) r.lambda.omega_b = *o.l_omega_b;
    if (o.l_theta) r.lambda.theta = *o.l_theta;
    if (o.l_delta) r.lambda.delta = *o.l_delta;
    return r;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

json spec_json(const SystemSpec& s) {
    json j;
    j["n_mech"] = s.n_mech;
    j["omega_m"] = s.omega_m;
    j["kappa"] = s.kappa;
    j["gamma"] = s.gamma;
    j["nbar"] = s.nbar;
    j["eta"] = s.eta;
    j["theta"] = s.theta;
    if (const auto* lin = std::get_if<Linearized>(&s.drive)) {
        j["drive"] = {{"mode", "linearized"}, {"delta", lin->delta}, {"g_lin", lin->g_lin}};
    } else {
        const auto& p = std::get<Physical>(s.drive);
        j["drive"] = {{"mode", "physical"},
                      {"delta_c", p.delta_c},
                      {"omega_drive", cjson(p.omega_drive_amp)},
                      {"g_single", p.g_single}};
    }
    return j;
}

json approx_json(const CouplingApprox& a) {
    return {{"optomechanical", to_string(a.optomechanical)}, {"mechanical", to_string(a.mechanical)}};
}

json provenance(const Resolved& r, const std::string& timestamp, bool with_normalizer) {
    json p = {{"tool", "loopcool"}, {"version", tool_version}, {"approximation", approx_json(r.approx)},
              {"timestamp", timestamp}};
    if (with_normalizer) p["normalizer"] = normalizer_note;
    return p;
}

json report_json(const CoolingReport& c) {
    json n = json::array();
    for (double x : c.n_f) n.push_back(num(x));
    return {{"n_f", n},
            {"n_cav", num(c.n_cav)},
            {"stable", c.stable},
            {"spectral_abscissa", num(c.spectral_abscissa)},
            {"residual", num(c.residual)}};
}

json effective_json(const EffectiveTwoMode& e) {
    return {{"form", to_string(e.form)},
            {"xi1", cjson(e.xi1)},
            {"xi2", cjson(e.xi2)},
            {"gamma_eff", e.gamma_eff},
            {"omega_eff", e.omega_eff},
            {"gamma_opt", e.gamma_opt},
            {"omega_opt", e.omega_opt},
            {"chi1", e.chi1},
            {"chi2", e.chi2},
            {"chi_plus", e.chi_plus},
            {"chi_minus", e.chi_minus},
            {"n_opt", e.n_opt},
            {"n_chi1", num(e.n_chi1)},
            {"n_chi2", num(e.n_chi2)},
            {"lambda1", cjson(e.lambda1)},
            {"lambda2", cjson(e.lambda2)},
            {"u_disc", cjson(e.u_disc)}};
}

json limit_json(const CoolingLimit& l) {
    return {{"n1", num(l.n1)}, {"n2", num(l.n2)}, {"xi_form", to_string(l.form)}, {"warnings", l.warnings}};
}

json limits_json(const SystemSpec& spec) {
    json j;
    j["effective_lorentzian"] = effective_json(effective_model(spec, XiForm::Lorentzian));
    j["effective_resonant"] = effective_json(effective_model(spec, XiForm::Resonant));
    const auto rep = cooling_limits(spec);
    j["simplified"] = limit_json(rep.simplified);
    j["full"] = limit_json(rep.full);
    json side;
    for (int l = 1; l <= 2; ++l) {
        const auto s = at_sideband(spec, l);
        const auto lim = cooling_limits(s);
        side["n" + std::to_string(l) + "_lim"] = {{"delta", s.delta()},
                                                  {"simplified", num(l == 1 ? lim.simplified.n1 : lim.simplified.n2)},
                                                  {"full", num(l == 1 ? lim.full.n1 : lim.full.n2)}};
    }
    j["at_sideband"] = side;
    return j;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    const std::string tmp = path + ".partial";
    try {
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw Error("cannot write " + path);
            f << text;
            f.flush();
            if (!f) throw Error("write failed for " + path);
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

std::string metadata(const Resolved& r, const std::string& command, const std::string& timestamp,
                     bool with_normalizer) {
    std::ostringstream os;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
        return s;
    };
    const auto& s = r.spec;
    os << "# tool: loopcool " << tool_version << "\n";
    os << "# command: " << command << "\n";
    os << "# timestamp: " << timestamp << "\n";
    os << "# approx.optomechanical: " << to_string(r.approx.optomechanical) << "\n";
    os << "# approx.mechanical: " << to_string(r.approx.mechanical) << "\n";
    if (with_normalizer) os << "# normalizer: " << normalizer_note << "\n";
    os << "# system.n_mech: " << s.n_mech << "\n";
    os << "# system.omega_m: " << list(s.omega_m) << "\n";
    os << "# system.kappa: " << format_double(s.kappa) << "\n";
    os << "# system.gamma: " << list(s.gamma) << "\n";
    os << "# system.nbar: " << list(s.nbar) << "\n";
    os << "# system.eta: " << list(s.eta) << "\n";
    os << "# system.theta: " << list(s.theta) << "\n";
    if (const auto* lin = std::get_if<Linearized>(&s.drive)) {
        os << "# drive.mode: linearized\n";
        os << "# drive.delta: " << format_double(lin->delta) << "\n";
        os << "# drive.g_lin: " << list(lin->g_lin) << "\n";
    } else {
        const auto& p = std::get<Physical>(s.drive);
        os << "# drive.mode: physical\n";
        os << "# drive.delta_c: " << format_double(p.delta_c) << "\n";
        os << "# drive.omega_re: " << format_double(p.omega_drive_amp.real()) << "\n";
        os << "# drive.omega_im: " << format_double(p.omega_drive_amp.imag()) << "\n";
        os << "# drive.g_single: " << list(p.g_single) << "\n";
    }
    return os.str();
}

std::vector<std::string> parameter_columns(const SystemSpec& s) {
    std::vector<std::string> c{"p_kappa"};
    const bool lin = s.is_linearized();
    c.push_back(lin ? "p_delta" : "p_delta_c");
    auto add = [&](const std::string& name, std::size_t n) {
        for (std::size_t i = 1; i <= n; ++i) c.push_back("p_" + name + std::to_string(i));
    };
    const auto n = static_cast<std::size_t>(s.n_mech);
    add("omega_m", n);
    add("gamma", n);
    add("nbar", n);
    add("eta", n - 1);
    add("theta", n - 1);
    add(lin ? "g_lin" : "g_single", n);
    return c;
}

std::vector<std::string> parameter_cells(const SystemSpec& s) {
    std::vector<std::string> c{format_double(s.kappa)};
    const auto* lin = std::get_if<Linearized>(&s.drive);
    c.push_back(format_double(lin ? lin->delta : std::get<Physical>(s.drive).delta_c));
    for (const auto* v : {&s.omega_m, &s.gamma, &s.nbar, &s.eta, &s.theta})
        for (double x : *v) c.push_back(format_double(x));
    for (double x : lin ? lin->g_lin : std::get<Physical>(s.drive).g_single) c.push_back(format_double(x));
    return c;
}

std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    return s;
}

bool wants(const SweepSpec& sw, const char* name) {
    return std::find(sw.outputs.begin(), sw.outputs.end(), name) != sw.outputs.end();
}

std::vector<std::string> sweep_row(const SystemSpec& spec, const SweepSpec& sw, const std::vector<double>& axes) {
    std::vector<std::string> cells;
    for (double a : axes) cells.push_back(format_double(a));
    const int n = spec.n_mech;
    CoolingReport rep;
    std::optional<DriftModel> drift;
    SystemSpec lin = spec;
    try {
        if (!lin.is_linearized()) lin = to_linearized(spec);
        drift = build_drift(lin, sw.approx);
        rep = solve_cooling(*drift);
    } catch (const NoFixedPoint&) {
        rep.stable = false;
        rep.spectral_abscissa = std::numeric_limits<double>::quiet_NaN();
    }
    const bool ok = rep.stable;
    auto cell = [&](double v) { return ok ? format_double(v) : std::string(); };
    if (wants(sw, "n_f")) {
        for (int j = 0; j < n; ++j) cells.push_back(ok ? format_double(rep.n_f[j]) : "");
        cells.push_back(cell(rep.n_cav));
    }
    if (wants(sw, "stable")) {
        cells.push_back(ok ? "true" : "false");
        cells.push_back(format_double(rep.spectral_abscissa));
    }
    if (wants(sw, "lambda_rel")) {
        if (ok) {
            const auto lam = lambda_numeric(*drift, lin.omega_m[0], cooperativities(lin));
            cells.push_back(format_double(lam(2, 1)));
            cells.push_back(format_double(lam(1, 2)));
        } else {
            cells.insert(cells.end(), 2, "");
        }
    }
    if (wants(sw, "limits")) {
        if (ok) {
            const auto lim = cooling_limits(lin);
            for (double v : {lim.simplified.n1, lim.simplified.n2, lim.full.n1, lim.full.n2})
                cells.push_back(format_double(v));
        } else {
            cells.insert(cells.end(), 4, "");
        }
    }
    if (wants(sw, "darkness")) {
        if (!ok)
            cells.push_back("");
        else if (n == 2)
            cells.push_back(format_double(hybrid_transform(lin).darkness));
        else
            cells.push_back(std::to_string(normal_modes(lin).dark_count));
    }
    const auto params = parameter_cells(spec);
    cells.insert(cells.end(), params.begin(), params.end());
    return cells;
}


std::vector<std::string> sweep_header(const SystemSpec& spec, const SweepSpec& sw) {
    std::vector<std::string> h{sw.axis1.path};
    if (sw.axis2) h.push_back(sw.axis2->path);
    const int n = spec.n_mech;
    if (wants(sw, "n_f")) {
        for (int j = 1; j <= n; ++j) h.push_back("n" + std::to_string(j));
        h.push_back("n_cav");
    }
    if (wants(sw, "stable")) {
        h.push_back("stable");
        h.push_back("abscissa");
    }
    if (wants(sw, "lambda_rel")) {
        h.push_back("lambda_b2b1");
        h.push_back("lambda_b1b2");
    }
    if (wants(sw, "limits")) {
        for (const char* c : {"n1_simplified", "n2_simplified", "n1_full", "n2_full"}) h.push_back(c);
    }
    if (wants(sw, "darkness")) h.push_back(n == 2 ? "darkness" : "dark_count");
    const auto p = parameter_columns(spec);
    h.insert(h.end(), p.begin(), p.end());
    return h;
}

void check_sweep_outputs(const SystemSpec& spec, const SweepSpec& sw) {
    if (spec.n_mech != 2 && (wants(sw, "lambda_rel") || wants(sw, "limits")))
        throw ConfigError("sweep outputs lambda_rel and limits need n_mech = 2");
}

json modes_json(const SystemSpec& spec) {
    json j;
    j["bright_dark"] = nullptr;
    j["hybrid"] = nullptr;
    j["shadow"] = nullptr;
    if (spec.n_mech == 2) {
        if (spec.eta[0] == 0) {
            try {
                const auto bd = bright_dark(spec);
                j["bright_dark"] = {{"omega_plus", bd.omega_plus},
                                    {"omega_minus", bd.omega_minus},
                                    {"zeta", bd.zeta},
                                    {"g_plus", bd.g_plus},
                                    {"weights", bd.weights},
                                    {"dark_mode_exists", bd.dark_mode_exists}};
            } catch (const DomainError&) {
            }
        }
        const auto h = hybrid_transform(spec);
        j["hybrid"] = {{"omega_tilde_plus", h.omega_tilde_plus},
                       {"omega_tilde_minus", h.omega_tilde_minus},
                       {"f", h.f},
                       {"h", h.h},
                       {"g_tilde_plus", cjson(h.g_tilde_plus)},
                       {"g_tilde_minus", cjson(h.g_tilde_minus)},
                       {"darkness", h.darkness}};
        const auto sh = shadow_area(spec);
        j["shadow"] = {{"detuning", sh.detuning}, {"linewidth", sh.linewidth}, {"inside", sh.inside}};
    }
    const auto nm = normal_modes(spec);
    json couplings = json::array();
    for (const auto& g : nm.coupling_k) couplings.push_back(cjson(g));
    std::vector<bool> flags(nm.dark_flags.begin(), nm.dark_flags.end());
    j["normal_modes"] = {{"n", nm.n},
                         {"closed_form", nm.closed_form},
                         {"omega_k", nm.omega_k},
                         {"coupling_k", couplings},
                         {"dark_flags", flags},
                         {"dark_count", nm.dark_count},
                         {"norm_a", nm.norm_a},
                         {"numeric_omega", nm.numeric_omega},
                         {"max_frequency_mismatch", nm.max_frequency_mismatch},
                         {"warnings", nm.warnings}};
    j["predicted_uncooled"] = nm.predicted_uncooled;
    return j;
}

json lambda_json(const LambdaEigen& le) {
    json vecs = json::array();
    for (const auto& v : le.vectors) {
        json amp = json::array();
        for (const auto& z : v) amp.push_back(cjson(z));
        vecs.push_back(amp);
    }
    json j = {{"lambdas", le.lambdas},
              {"vectors", vecs},
              {"p_e", le.p_e},
              {"dark_index", le.dark_index ? json(*le.dark_index) : json(nullptr)},
              {"numeric_vector", le.numeric_vector},
              {"cubic_residual", le.cubic_residual},
              {"imag_residue", le.imag_residue}};
    if (le.cardano)
        j["cardano"] = {{"q", le.cardano->q}, {"r", le.cardano->r}, {"s1", cjson(le.cardano->s1)},
                        {"s2", cjson(le.cardano->s2)}};
    else
        j["cardano"] = nullptr;
    return j;
}

std::string spectrum_csv(const Resolved& r, const DriftModel& drift, const std::string& timestamp) {
    const int n = drift.n_mech;
    const bool two = n == 2;
    const Cooperativities coop = two ? cooperativities(r.spec) : Cooperativities{};
    const auto grid = frequency_grid(r.spectrum.omega_min, r.spectrum.omega_max, r.spectrum.points);
    const auto pts = scan(drift, grid, coop, r.workers);
    std::ostringstream os;
    os << metadata(r, "spectrum", timestamp, two);
    std::vector<std::string> names{"a"};
    for (int j = 1; j <= n; ++j) names.push_back("b" + std::to_string(j));
    std::vector<std::string> h{"omega"};
    for (int v = 0; v <= n; ++v)
        for (int w = 0; w <= n; ++w)
            if (v != w) h.push_back("T_" + names[v] + "_" + names[w]);
    double analytic = std::numeric_limits<double>::quiet_NaN();
    if (two) {
        for (const char* c : {"lambda_b2b1", "lambda_b1b2", "lambda_analytic"}) h.push_back(c);
        if (coop.c1 * coop.c2 > 0) analytic = lambda_analytic(coop, r.spec.theta[0]);
    }
    os << join(h) << "\n";
    for (const auto& p : pts) {
        std::vector<std::string> cells{format_double(p.omega)};
        for (int v = 0; v <= n; ++v)
            for (int w = 0; w <= n; ++w)
                if (v != w) cells.push_back(format_double(p.t(v, w)));
        if (two) {
            cells.push_back(format_double(p.lambda_rel(2, 1)));
            cells.push_back(format_double(p.lambda_rel(1, 2)));
            cells.push_back(format_double(analytic));
        }
        os << join(cells) << "\n";
    }
    return os.str();
}

SystemSpec linear_spec(const SystemSpec& s) { return s.is_linearized() ? s : to_linearized(s); }

int fail(std::ostream& err, int code, const std::string& msg) {
    err << "loopcool: " << msg << "\n";
    return code;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sweep_csv(const Resolved& run, const std::string& timestamp) {
    if (!run.sweep) throw ConfigError("no [sweep] section in the configuration");
    const SweepSpec& sw = *run.sweep;
    check_sweep_outputs(run.spec, sw);
    const int n1 = sw.axis1.points;
    const int n2 = sw.axis2 ? sw.axis2->points : 1;
    const auto total = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);

    std::vector<SystemSpec> specs;
    std::vector<std::vector<double>> axes;
    specs.reserve(total);
    for (int i = 0; i < n1; ++i) {
        for (int k = 0; k < n2; ++k) {
            SystemSpec s = run.spec;
            std::vector<double> ax{sw.axis1.value(i)};
            apply_parameter(s, sw.axis1.path, ax[0]);
            if (sw.axis2) {
                ax.push_back(sw.axis2->value(k));
                apply_parameter(s, sw.axis2->path, ax[1]);
            }
            try {
                s = validated(s);
            } catch (const InvalidSpec& e) {
                throw ConfigError(std::string("sweep leaves the valid parameter range: ") + e.what());
            }
            specs.push_back(std::move(s));
            axes.push_back(std::move(ax));
        }
    }
    const auto rows = parallel_map<std::vector<std::string>>(
        total, run.workers, [&](std::size_t i) { return sweep_row(specs[i], sw, axes[i]); });

    std::ostringstream os;
    os << metadata(run, "sweep", timestamp, wants(sw, "lambda_rel"));
    os << "# sweep.axis1: " << sw.axis1.path << " " << format_double(sw.axis1.start) << " "
       << format_double(sw.axis1.stop) << " " << sw.axis1.points << "\n";
    if (sw.axis2)
        os << "# sweep.axis2: " << sw.axis2->path << " " << format_double(sw.axis2->start) << " "
           << format_double(sw.axis2->stop) << " " << sw.axis2->points << "\n";
    os << join(sweep_header(run.spec, sw)) << "\n";
    for (const auto& r : rows) os << join(r) << "\n";
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady-state cooling of loop-coupled optomechanical resonators", "loopcool"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    Options o;

    auto common = [&o](CLI::App* sub) {
        sub->add_option("-c,--config", o.configs, "configuration file (repeatable, later files win)");
        sub->add_option("-p,--preset", o.preset, "named preset applied before any configuration file");
        sub->add_option("-s,--set", o.sets, "override a key, e.g. system.kappa=0.5 (repeatable)");
        sub->add_option("-o,--out", o.out, "write the result to this file instead of stdout");
        auto* orwa = sub->add_flag("--om-rwa", o.om_rwa, "rotating-wave optomechanical coupling");
        auto* ofull = sub->add_flag("--om-full", o.om_full, "full optomechanical coupling");
        auto* mrwa = sub->add_flag("--mech-rwa", o.mech_rwa, "rotating-wave mechanical coupling");
        auto* mfull = sub->add_flag("--mech-full", o.mech_full, "full mechanical coupling");
        orwa->excludes(ofull);
        mrwa->excludes(mfull);
        sub->add_option("-j,--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* cool = app.add_subcommand("cool", "steady-state phonon numbers for one configuration");
    auto* sweep = app.add_subcommand("sweep", "CSV over one or two parameter axes");
    auto* spectrum = app.add_subcommand("spectrum", "transmittances and nonreciprocity over a frequency grid");
    auto* modes = app.add_subcommand("modes", "bright/dark, hybrid and normal-mode analysis");
    auto* lambda = app.add_subcommand("lambda", "three-level Lambda-system eigenproblem");
    auto* limits = app.add_subcommand("limits", "analytic cooling limits of the two-mode model");
    auto* stability = app.add_subcommand("stability", "drift-matrix spectrum and stability verdict");
    for (auto* s : {cool, sweep, spectrum, modes, lambda, limits, stability}) common(s);
    sweep->add_option("--sweep", o.sweep_file, "file with a [sweep] section");
    spectrum->add_option("--omega-min", o.omega_min, "lower probe frequency");
    spectrum->add_option("--omega-max", o.omega_max, "upper probe frequency");
    spectrum->add_option("--points", o.points, "grid points")->check(CLI::Range(2, 10000000));
    lambda->add_option("--eta", o.l_eta, "omega_b / omega_1");
    lambda->add_option("--theta", o.l_theta, "loop phase");
    lambda->add_option("--delta", o.l_delta, "detuning of |e>");
    lambda->add_option("--omega1", o.l_omega1, "first pump amplitude");
    lambda->add_option("--omega2", o.l_omega2, "second pump amplitude");
    lambda->add_option("--omega-b", o.l_omega_b, "ground-state coupling amplitude");
    lambda->add_option("--theta-points", o.theta_points, "also scan theta over [0, 2pi] with this many points")
        ->check(CLI::Range(0, 1000000));

    std::vector<std::string> argv_store{"loopcool"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        // Subcommand help is reported through the same exception type.
        if (e.get_exit_code() == 0) {
            out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
            return exit_ok;
        }
        return fail(err, exit_config, e.what());
    }

    const std::string timestamp = timestamp_now();
    try {
        const Resolved r = load(o);
        if (sweep->parsed()) {
            emit(sweep_csv(r, timestamp), o.out, out);
            return exit_ok;
        }
        if (lambda->parsed()) {
            json j;
            j["system"] = {{"delta", r.lambda.delta},     {"omega1", r.lambda.omega1}, {"omega2", r.lambda.omega2},
                           {"omega_b", r.lambda.omega_b}, {"theta", r.lambda.theta}, {"eta_ratio", r.lambda.eta_ratio()}};
            j["eigen"] = lambda_json(lambda_eigensystem(r.lambda));
            if (o.theta_points > 0) {
                json scan_rows = json::array();
                const auto thetas = o.theta_points == 1 ? std::vector<double>{0.0}
                                                        : frequency_grid(0.0, 2 * std::numbers::pi, o.theta_points);
                for (double t : thetas) {
                    LambdaSystem s = r.lambda;
                    s.theta = t;
                    const auto le = lambda_eigensystem(s);
                    scan_rows.push_back({{"theta", t}, {"lambdas", le.lambdas}, {"p_e", le.p_e}});
                }
                j["theta_scan"] = scan_rows;
            }
            j["provenance"] = {{"tool", "loopcool"}, {"version", tool_version}, {"timestamp", timestamp}};
            emit(j.dump(2) + "\n", o.out, out);
            return exit_ok;
        }

        const SystemSpec spec = linear_spec(r.spec);
        if (modes->parsed()) {
            json j = modes_json(spec);
            j["system"] = spec_json(r.spec);
            j["provenance"] = provenance(r, timestamp, false);
            emit(j.dump(2) + "\n", o.out, out);
            return exit_ok;
        }
        if (limits->parsed()) {
            if (spec.n_mech != 2) throw ConfigError("limits needs system.n_mech = 2");
            json j = limits_json(spec);
            const auto exact = solve_cooling(build_drift(spec, r.approx));
            j["exact"] = report_json(exact);
            j["regime_warnings"] = regime_warnings(spec);
            j["system"] = spec_json(r.spec);
            j["provenance"] = provenance(r, timestamp, false);
            emit(j.dump(2) + "\n", o.out, out);
            return exit_ok;
        }

        const DriftModel drift = build_drift(spec, r.approx);
        if (stability->parsed()) {
            const auto ev = eigenvalues(drift.a);
            std::vector<cplx> vals = ev.values;
            std::sort(vals.begin(), vals.end(), [](cplx x, cplx y) {
                return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
            });
            json arr = json::array();
            for (auto z : vals) arr.push_back(cjson(z));
            const auto verdict = stability_check(drift);
            json j = {{"stable", verdict.stable},
                      {"spectral_abscissa", num(verdict.abscissa)},
                      {"eigenvalues", arr},
                      {"converged", ev.convergence_flag},
                      {"system", spec_json(r.spec)},
                      {"provenance", provenance(r, timestamp, false)}};
            emit(j.dump(2) + "\n", o.out, out);
            return verdict.stable ? exit_ok : exit_unstable;
        }
        if (cool->parsed()) {
            const auto rep = solve_cooling(drift);
            json j = report_json(rep);
            j["regime_warnings"] = spec.n_mech == 2 ? json(regime_warnings(spec)) : json::array();
            if (spec.n_mech == 2) {
                const auto lim = cooling_limits(spec);
                j["limits"] = {{"simplified", limit_json(lim.simplified)}, {"full", limit_json(lim.full)}};
            }
            j["system"] = spec_json(r.spec);
            j["provenance"] = provenance(r, timestamp, false);
            emit(j.dump(2) + "\n", o.out, out);
            if (!rep.stable) {
                err << "loopcool: drift matrix is unstable (spectral abscissa " << format_double(rep.spectral_abscissa)
                    << ")\n";
                return exit_unstable;
            }
            return exit_ok;
        }
        if (spectrum->parsed()) {
            const auto verdict = stability_check(drift);
            if (!verdict.stable)
                return fail(err, exit_unstable,
                            "drift matrix is unstable (spectral abscissa " + format_double(verdict.abscissa) + ")");
            emit(spectrum_csv(r, drift, timestamp), o.out, out);
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        return fail(err, exit_config, e.what());
    } catch (const InvalidSpec& e) {
        return fail(err, exit_config, e.what());
    } catch (const Unstable& e) {
        return fail(err, exit_unstable, e.what());
    } catch (const std::exception& e) {
        return fail(err, exit_failure, e.what());
    }
    return fail(err, exit_failure, "no subcommand");
}

}  // namespace loopcool::cli
