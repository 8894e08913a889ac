#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace loopcool::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_factor(const std::string& f, const std::string& whole) {
    if (f == "pi") return std::numbers::pi;
    std::string num = f;
    double scale = 1;
    if (num.size() > 2 && num.compare(num.size() - 2, 2, "pi") == 0) {
        num = num.substr(0, num.size() - 2);
        scale = std::numbers::pi;
        if (num == "-") return -scale;
    }
    double v = 0;
    const char* first = num.data();
    const char* last = num.data() + num.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || num.empty()) throw ConfigError("not a number: '" + whole + "'");
    return v * scale;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "system.n_mech", "system.omega_m", "system.kappa", "system.gamma", "system.nbar", "system.eta",
        "system.theta", "drive.mode", "drive.delta", "drive.g_lin", "drive.delta_c", "drive.omega_re",
        "drive.omega_im", "drive.g_single", "approx.optomechanical", "approx.mechanical", "sweep.axis1",
        "sweep.axis2", "sweep.outputs", "spectrum.omega_min", "spectrum.omega_max", "spectrum.points",
        "lambda.eta", "lambda.theta", "lambda.delta", "lambda.omega1", "lambda.omega2", "lambda.omega_b",
        "run.workers"};
    return keys;
}

std::string where(const Entry& e) { return " (" + e.origin + ")"; }

Coupling parse_coupling(const Entry& e) {
    if (e.value == "full") return Coupling::FULL;
    if (e.value == "rwa") return Coupling::RWA;
    throw ConfigError("expected 'full' or 'rwa', got '" + e.value + "'" + where(e));
}

std::vector<double> sized(const Config& cfg, const std::string& key, std::size_t n, std::optional<double> fallback) {
    if (!cfg.has(key)) {
        if (fallback) return std::vector<double>(n, *fallback);
        throw ConfigError("missing key " + key);
    }
    const auto& e = cfg.at(key);
    std::vector<double> v;
    try {
        v = parse_list(e.value);
    } catch (const ConfigError& err) {
        throw ConfigError(std::string(err.what()) + " in " + key + where(e));
    }
    if (v.size() == 1 && n != 1) return std::vector<double>(n, v[0]);
    if (v.size() != n)
        throw ConfigError(key + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n) +
                          where(e));
    return v;
}

double scalar(const Config& cfg, const std::string& key, double fallback) {
    if (!cfg.has(key)) return fallback;
    const auto& e = cfg.at(key);
    try {
        return parse_number(e.value);
    } catch (const ConfigError& err) {
        throw ConfigError(std::string(err.what()) + " in " + key + where(e));
    }
}

int integer(const Config& cfg, const std::string& key, int fallback) {
    const double v = scalar(cfg, key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + " must be an integer" + where(cfg.at(key)));
    return static_cast<int>(v);
}

Axis parse_axis(const Entry& e) {
    const auto parts = split(e.value, ',');
    if (parts.size() != 4) throw ConfigError("axis needs 'path, start, stop, points'" + where(e));
    Axis a;
    a.path = parts[0];
    try {
        a.start = parse_number(parts[1]);
        a.stop = parse_number(parts[2]);
        const double p = parse_number(parts[3]);
        if (p != std::floor(p) || p < 2 || p > 1e7) throw ConfigError("axis points must be an integer >= 2");
        a.points = static_cast<int>(p);
    } catch (const ConfigError& err) {
        throw ConfigError(std::string(err.what()) + where(e));
    }
    return a;
}

}  // namespace

void Config::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string loc = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header at " + loc);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name at " + loc);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value at " + loc);
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key at " + loc);
        set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)), loc);
    }
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "' at " + origin);
    entries_[key] = Entry{value, origin};
}

const Entry& Config::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key " + key);
    return it->second;
}

double Axis::value(int i) const {
    if (i == points - 1) return stop;
    const double t = static_cast<double>(i) / (points - 1);
    return start * (1 - t) + stop * t;
}

double parse_number(const std::string& raw) {
    const std::string text = trim(raw);
    if (text.empty()) throw ConfigError("empty number");
    double acc = 1;
    char op = '*';
    std::string cur;
    auto flush = [&] {
        const double v = parse_factor(trim(cur), text);
        acc = op == '*' ? acc * v : acc / v;
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '*' || c == '/') && i > 0) {
            flush();
            op = c;
        } else {
            cur += c;
        }
    }
    flush();
    if (!std::isfinite(acc)) throw ConfigError("non-finite number: '" + text + "'");
    return acc;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part));
    return out;
}

Resolved resolve(const Config& cfg) {
    Resolved r;
    SystemSpec& s = r.spec;
    s.n_mech = integer(cfg, "system.n_mech", 2);
    if (s.n_mech < 1 || s.n_mech > 24) throw ConfigError("system.n_mech must be between 1 and 24");
    const auto n = static_cast<std::size_t>(s.n_mech);
    s.omega_m = sized(cfg, "system.omega_m", n, 1.0);
    s.kappa = scalar(cfg, "system.kappa", 0.2);
    s.gamma = sized(cfg, "system.gamma", n, 1e-5);
    s.nbar = sized(cfg, "system.nbar", n, 1e3);
    s.eta = sized(cfg, "system.eta", n - 1, 0.0);
    s.theta = sized(cfg, "system.theta", n - 1, 0.0);

    const std::string mode = cfg.has("drive.mode") ? cfg.at("drive.mode").value : "linearized";
    if (mode == "linearized") {
        for (const char* k : {"drive.delta_c", "drive.omega_re", "drive.omega_im", "drive.g_single"})
            if (cfg.has(k)) throw ConfigError(std::string(k) + " is only valid with drive.mode = physical");
        s.drive = Linearized{scalar(cfg, "drive.delta", 1.0), sized(cfg, "drive.g_lin", n, 0.1)};
    } else if (mode == "physical") {
        for (const char* k : {"drive.delta", "drive.g_lin"})
            if (cfg.has(k)) throw ConfigError(std::string(k) + " is only valid with drive.mode = linearized");
        Physical p;
        p.delta_c = scalar(cfg, "drive.delta_c", 1.0);
        p.omega_drive_amp = cplx(scalar(cfg, "drive.omega_re", 0.0), scalar(cfg, "drive.omega_im", 0.0));
        p.g_single = sized(cfg, "drive.g_single", n, std::nullopt);
        s.drive = p;
    } else {
        throw ConfigError("drive.mode must be 'linearized' or 'physical'" + where(cfg.at("drive.mode")));
    }
    try {
        s = validated(s);
    } catch (const InvalidSpec& e) {
        throw ConfigError(e.what());
    }

    if (cfg.has("approx.optomechanical")) r.approx.optomechanical = parse_coupling(cfg.at("approx.optomechanical"));
    if (cfg.has("approx.mechanical")) r.approx.mechanical = parse_coupling(cfg.at("approx.mechanical"));

    if (cfg.has("sweep.axis1")) {
        SweepSpec sw;
        sw.axis1 = parse_axis(cfg.at("sweep.axis1"));
        if (cfg.has("sweep.axis2")) sw.axis2 = parse_axis(cfg.at("sweep.axis2"));
        sw.outputs = {"n_f", "stable"};
        if (cfg.has("sweep.outputs")) {
            sw.outputs = split(cfg.at("sweep.outputs").value, ',');
            static const std::set<std::string> allowed{"n_f", "stable", "lambda_rel", "limits", "darkness"};
            for (const auto& o : sw.outputs)
                if (!allowed.count(o)) throw ConfigError("unknown sweep output '" + o + "'" + where(cfg.at("sweep.outputs")));
        }
        for (const Axis* a : {&sw.axis1, sw.axis2 ? &*sw.axis2 : nullptr}) {
            if (!a) continue;
            SystemSpec probe = s;
            apply_parameter(probe, a->path, a->start);
        }
        r.sweep = sw;
    } else if (cfg.has("sweep.axis2") || cfg.has("sweep.outputs")) {
        throw ConfigError("sweep section needs axis1");
    }

    r.spectrum.omega_min = scalar(cfg, "spectrum.omega_min", 0.9 * s.omega_m[0]);
    r.spectrum.omega_max = scalar(cfg, "spectrum.omega_max", 1.1 * s.omega_m[0]);
    r.spectrum.points = integer(cfg, "spectrum.points", 801);
    if (r.spectrum.points < 2) throw ConfigError("spectrum.points must be at least 2");
    if (!(r.spectrum.omega_max > r.spectrum.omega_min)) throw ConfigError("spectrum.omega_max must exceed omega_min");

    LambdaSystem& l = r.lambda;
    l.delta = scalar(cfg, "lambda.delta", 0.0);
    l.omega1 = scalar(cfg, "lambda.omega1", 1.0);
    l.omega2 = scalar(cfg, "lambda.omega2", l.omega1);
    l.omega_b = cfg.has("lambda.omega_b") ? scalar(cfg, "lambda.omega_b", 0.0) : scalar(cfg, "lambda.eta", 0.5) * l.omega1;
    l.theta = scalar(cfg, "lambda.theta", 0.0);
    if (l.omega1 < 0 || l.omega2 < 0 || l.omega_b < 0) throw ConfigError("lambda amplitudes must be non-negative");

    r.workers = integer(cfg, "run.workers", 1);
    if (r.workers < 1) throw ConfigError("run.workers must be at least 1");
    return r;
}

void apply_parameter(SystemSpec& spec, const std::string& path, double value) {
    std::string name = path;
    int index = 0;
    const auto br = path.find('[');
    if (br != std::string::npos) {
        if (path.back() != ']') throw ConfigError("bad parameter path '" + path + "'");
        name = path.substr(0, br);
        const std::string idx = path.substr(br + 1, path.size() - br - 2);
        int v = 0;
        auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), v);
        if (ec != std::errc() || ptr != idx.data() + idx.size() || v < 1)
            throw ConfigError("bad index in parameter path '" + path + "'");
        index = v;
    }
    auto set_list = [&](std::vector<double>& list) {
        if (index == 0) {
            std::fill(list.begin(), list.end(), value);
        } else {
            if (static_cast<std::size_t>(index) > list.size())
                throw ConfigError("index out of range in parameter path '" + path + "'");
            list[static_cast<std::size_t>(index - 1)] = value;
        }
    };
    auto scalar_only = [&](double& field) {
        if (index != 0) throw ConfigError("parameter '" + name + "' takes no index");
        field = value;
    };
    if (name == "kappa") return scalar_only(spec.kappa);
    if (name == "omega_m") return set_list(spec.omega_m);
    if (name == "gamma") return set_list(spec.gamma);
    if (name == "nbar") return set_list(spec.nbar);
    if (name == "eta") return set_list(spec.eta);
    if (name == "theta") {
        set_list(spec.theta);
        for (double& t : spec.theta) t = reduce_phase(t);
        return;
    }
    if (auto* lin = std::get_if<Linearized>(&spec.drive)) {
        if (name == "delta") return scalar_only(lin->delta);
        if (name == "g_lin") return set_list(lin->g_lin);
    } else {
        auto& phys = std::get<Physical>(spec.drive);
        if (name == "delta_c") return scalar_only(phys.delta_c);
        if (name == "g_single") return set_list(phys.g_single);
    }
    throw ConfigError("unknown parameter path '" + path + "'");
}

const std::map<std::string, std::string>& presets() {
    static const std::string base =
        "[system]\nn_mech = 2\nomega_m = 1\nkappa = 0.2\ngamma = 1e-5\nnbar = 1000\neta = 0.05\ntheta = pi/2\n"
        "[drive]\nmode = linearized\ndelta = 1\ng_lin = 0.1\n";
    static const std::map<std::string, std::string> table{
        {"fig2", base + "[sweep]\naxis1 = theta, 0, 2pi, 65\noutputs = n_f, stable\n"},
        {"fig3", base + "[sweep]\naxis1 = theta, 0, 2pi, 33\noutputs = lambda_rel, stable\n"},
        {"fig4", base + "[drive]\ng_lin = 0.05\n[sweep]\naxis1 = kappa, 0.1, 1.0, 19\noutputs = n_f, limits\n"},
        {"figS1", base + "[sweep]\naxis1 = omega_m[2], 0.8, 1.2, 81\noutputs = n_f, stable\n"},
        {"figS2", base + "[sweep]\naxis1 = g_lin[2], 0.01, 0.2, 39\noutputs = n_f, stable\n"},
        {"figS3", base + "[sweep]\naxis1 = eta, 0, 0.2, 41\noutputs = n_f, stable\n"},
        {"figS4", base + "[system]\nomega_m = 1, 1.2\n[sweep]\naxis1 = theta, 0, 2pi, 65\n"
                         "axis2 = eta, 0.01, 0.1, 10\noutputs = n_f, stable\n"},
        {"figS5", base + "[sweep]\naxis1 = gamma[1], 1e-6, 1e-4, 21\noutputs = n_f, stable\n"},
        {"figS6", base + "[spectrum]\nomega_min = 0.9\nomega_max = 1.1\npoints = 801\n"},
        {"figS7", base + "[sweep]\naxis1 = theta, 0, 2pi, 65\noutputs = lambda_rel\n"},
        {"figS8", base + "[drive]\ng_lin = 0.08\n[sweep]\naxis1 = kappa, 0.1, 1.5, 29\noutputs = n_f, limits\n"},
        {"figS10", "[system]\nn_mech = 3\nomega_m = 1\nkappa = 0.2\ngamma = 1e-5\nnbar = 1000\neta = 0.1\n"
                   "theta = pi/2, 0\n[drive]\nmode = linearized\ndelta = 1\ng_lin = 0.1\n"
                   "[sweep]\naxis1 = delta, 0.5, 1.5, 101\noutputs = n_f, stable\n"},
        {"figS11", "[system]\nn_mech = 4\nomega_m = 1\nkappa = 0.2\ngamma = 1e-5\nnbar = 1000\neta = 0.1\n"
                   "theta = pi/2, 0, 0\n[drive]\nmode = linearized\ndelta = 1\ng_lin = 0.1\n"},
        {"figS12", "[system]\nn_mech = 4\nomega_m = 1\nkappa = 0.2\ngamma = 1e-5\nnbar = 1000\neta = 0.1\n"
                   "theta = pi/2, 0, 0\n[drive]\nmode = linearized\ndelta = 1\ng_lin = 0.1\n"
                   "[sweep]\naxis1 = theta[1], 0, 2pi, 65\noutputs = n_f, darkness\n"},
        {"figS13", base + "[approx]\nmechanical = full\n[sweep]\naxis1 = eta, 0.01, 0.3, 30\noutputs = n_f, stable\n"},
        {"lambda", "[lambda]\neta = 0.5\ntheta = 0\n"},
    };
    return table;
}

}  // namespace loopcool::cli
