#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "app.hpp"
#include "loopcool/limits.hpp"
#include "loopcool/modes.hpp"
#include "loopcool/spectra.hpp"
#include "loopcool/steadystate.hpp"

using namespace loopcool;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(double v) { return cli::format_double(v); }

SystemSpec reference(double eta, double theta, double g = 0.1, double kappa = 0.2) {
    return uniform_spec(2, 1.0, g, kappa, 1e-5, 1e3, eta, {theta});
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome dark_mode_ceiling() {
    Outcome o;
    const auto rep = solve_cooling(build_drift(reference(0.0, 0.0)));
    o.require(rep.stable, "unstable");
    for (double n : rep.n_f) o.require(rel(n, 500) <= 0.05, "n_f = " + fmt(n));
    o.detail = o.pass ? "n_f = " + fmt(rep.n_f[0]) + ", " + fmt(rep.n_f[1]) : o.detail;
    return o;
}

Outcome dark_mode_breaking() {
    Outcome o;
    const auto up = solve_cooling(build_drift(reference(0.05, pi / 2)));
    const auto down = solve_cooling(build_drift(reference(0.05, 3 * pi / 2)));
    o.require(up.n_f[0] < 1 && up.n_f[1] < 1, "theta=pi/2 not ground-state cooled");
    o.require(up.n_f[0] < up.n_f[1], "n1 >= n2 at theta=pi/2");
    o.require(down.n_f[0] > down.n_f[1], "n1 <= n2 at theta=3pi/2");
    if (o.pass) o.detail = "theta=pi/2: " + fmt(up.n_f[0]) + " < " + fmt(up.n_f[1]);
    return o;
}

Outcome n_mode_ceiling() {
    Outcome o;
    std::string worst;
    for (int n : {3, 4}) {
        const auto rep = solve_cooling(build_drift(uniform_spec(n, 1.0, 0.1, 0.2, 1e-5, 1e3, 0.0, {})));
        const double ceiling = 1e3 * (n - 1) / n;
        for (double x : rep.n_f) o.require(rel(x, ceiling) <= 0.05, "N=" + std::to_string(n) + " n_f = " + fmt(x));
        std::vector<double> theta(static_cast<std::size_t>(n - 1), 0.0);
        theta[0] = pi / 2;
        const auto broken = solve_cooling(build_drift(uniform_spec(n, 1.0, 0.1, 0.2, 1e-5, 1e3, 0.1, theta)));
        double high = 0;
        for (double x : broken.n_f) high = std::max(high, x);
        o.require(broken.stable && high < 1, "N=" + std::to_string(n) + " broken max n_f = " + fmt(high));
        worst += "N=" + std::to_string(n) + " max " + fmt(high) + " ";
    }
    if (o.pass) o.detail = worst;
    return o;
}

Outcome nonreciprocity() {
    Outcome o;
    const auto base = cooperativities(reference(0.05, pi / 2));
    o.require(std::abs(base.pi_ratio - 1) <= 1e-12, "Pi != 1");
    Cooperativities unit = base;
    unit.pi_ratio = 1;
    o.require(lambda_analytic(unit, pi / 2) == 1.0, "analytic Lambda != 1");
    double worst = 0;
    for (int k = 0; k < 16; ++k) {
        const double theta = 2 * pi * k / 16;
        const auto s = reference(0.05, theta);
        const auto coop = cooperativities(s);
        const RMatrix l = lambda_numeric(build_drift(s), 1.0, coop);
        worst = std::max(worst, std::abs(l(2, 1) - lambda_analytic(coop, theta)));
        const RMatrix mech = l.bottomRightCorner(2, 2);
        o.require((mech + mech.transpose()).cwiseAbs().maxCoeff() == 0.0, "Lambda not antisymmetric");
    }
    o.require(worst <= 0.05, "max |numeric - analytic| = " + fmt(worst));
    for (double theta : {0.0, pi, 2 * pi}) {
        const auto s = reference(0.05, theta);
        const RMatrix mech = lambda_numeric(build_drift(s), 1.0, cooperativities(s)).bottomRightCorner(2, 2);
        o.require(mech.cwiseAbs().maxCoeff() <= 1e-10, "|Lambda| at theta=" + fmt(theta) + " is " + fmt(mech.cwiseAbs().maxCoeff()));
    }
    if (o.pass) o.detail = "max deviation " + fmt(worst);
    return o;
}

Outcome cooling_limit_agreement() {
    Outcome o;
    for (double theta : {pi / 2, 3 * pi / 2}) {
        const auto s = reference(0.05, theta, 0.05);
        const auto exact = solve_cooling(build_drift(s));
        const auto lim = cooling_limits(s).simplified;
        o.require(rel(lim.n1, exact.n_f[0]) <= 0.10 && rel(lim.n2, exact.n_f[1]) <= 0.10,
                  "theta=" + fmt(theta) + ": " + fmt(lim.n1) + " vs " + fmt(exact.n_f[0]));
    }
    std::vector<double> err;
    for (double kappa : {0.2, 0.6, 1.0}) {
        const auto s = reference(0.05, pi / 2, 0.05, kappa);
        const auto exact = solve_cooling(build_drift(s));
        const auto lim = cooling_limits(s).simplified;
        err.push_back(std::max(rel(lim.n1, exact.n_f[0]), rel(lim.n2, exact.n_f[1])));
    }
    o.require(err[0] < err[1] && err[0] < err[2], "error at kappa=0.2 not the smallest");
    if (o.pass) o.detail = "errors at kappa 0.2/0.6/1.0: " + fmt(err[0]) + " " + fmt(err[1]) + " " + fmt(err[2]);
    return o;
}

// Largest relative occupation gap; an unstable full model counts as an infinite gap.
double rwa_gap(double eta) {
    const auto s = reference(eta, pi / 2);
    const auto rwa = solve_cooling(build_drift(s, {Coupling::FULL, Coupling::RWA}));
    const auto full = solve_cooling(build_drift(s, {Coupling::FULL, Coupling::FULL}));
    if (!full.stable || !rwa.stable) return inf;
    double gap = 0;
    for (int j = 0; j < 2; ++j) gap = std::max(gap, rel(rwa.n_f[j], full.n_f[j]));
    return gap;
}

Outcome rwa_validity() {
    Outcome o;
    for (double eta : {0.01, 0.02, 0.05, 0.08, 0.1}) o.require(rwa_gap(eta) <= 0.10, "gap at eta=" + fmt(eta) + " is " + fmt(rwa_gap(eta)));
    const double small = rwa_gap(0.05), large = rwa_gap(0.5);
    o.require(large > small, "gap at eta=0.5 not larger");
    if (o.pass) o.detail = "gap 0.05: " + fmt(small) + ", gap 0.5: " + fmt(large);
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0, 1);
    const Coupling cs[] = {Coupling::FULL, Coupling::RWA};
    int accepted = 0, attempts = 0;
    double worst = 0;
    while (accepted < 20 && attempts < 2000) {
        ++attempts;
        const int n = 1 + static_cast<int>(u(rng) * 4);
        SystemSpec s = uniform_spec(n, 0.8 + 0.4 * u(rng), 0.1, 0.1 + 0.3 * u(rng), 1e-4, 10, 0.0, {});
        for (auto& w : s.omega_m) w = 0.9 + 0.2 * u(rng);
        for (auto& g : std::get<Linearized>(s.drive).g_lin) g = 0.02 + 0.1 * u(rng);
        for (auto& gm : s.gamma) gm = std::pow(10.0, -5 + 2 * u(rng));
        for (auto& nb : s.nbar) nb = 1000 * u(rng);
        for (auto& e : s.eta) e = 0.08 * u(rng);
        for (auto& t : s.theta) t = 2 * pi * u(rng);
        const double gamma_min = *std::min_element(s.gamma.begin(), s.gamma.end());
        const auto drift = build_drift(s, {cs[attempts % 2], cs[(attempts / 2) % 2]});
        const auto verdict = stability_check(drift);
        // Keeps 50/gamma long enough for the slowest mode to settle.
        if (!(verdict.abscissa <= -0.3 * gamma_min)) continue;
        ++accepted;
        const CMatrix v = lyapunov_solve(drift);
        const CMatrix x = integrate_linear_ode(drift.a, drift.q, CMatrix::Zero(drift.dim(), drift.dim()), 50 / gamma_min);
        const double floor = 1e-12 * v.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double d = std::abs(x(i, i) - v(i, i));
            worst = std::max(worst, d / std::max(std::abs(v(i, i)), floor));
            o.require(d <= 1e-6 * std::abs(v(i, i)) + floor, "diagonal " + std::to_string(i) + " differs by " + fmt(d));
        }
        const auto a = phonon_numbers(v, n), b = phonon_numbers(x, n);
        for (int j = 0; j < n; ++j) o.require(rel(b.n_f[j], a.n_f[j]) <= 1e-6, "n_f differs");
    }
    o.require(accepted == 20, "only " + std::to_string(accepted) + " stable specs sampled");
    if (o.pass) o.detail = "20 specs, max relative diagonal gap " + fmt(worst);
    return o;
}

Outcome mode_structure() {
    Outcome o;
    double mismatch = 0;
    for (int n = 2; n <= 8; ++n) {
        std::vector<double> theta(static_cast<std::size_t>(n - 1));
        for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = 0.7 * (j + 1);
        const auto nm = normal_modes(uniform_spec(n, 1.0, 0.1, 0.2, 1e-5, 1e3, 0.1, theta));
        mismatch = std::max(mismatch, nm.max_frequency_mismatch);
    }
    o.require(mismatch <= 1e-10, "frequency mismatch " + fmt(mismatch));
    const auto four = normal_modes(uniform_spec(4, 1.0, 0.1, 0.2, 1e-5, 1e3, 0.1, {0, 0, 0}));
    o.require(four.dark_count == 2, "N=4 dark count " + std::to_string(four.dark_count));
    o.require(hybrid_transform(reference(0.05, 0.0)).darkness <= 1e-10, "not dark at theta=0");
    o.require(hybrid_transform(reference(0.05, pi)).darkness <= 1e-10, "not dark at theta=pi");
    double power = 0;
    for (double eta : {0.01, 0.05, 0.2})
        for (double w2 : {0.9, 1.0, 1.1})
            for (int k = 0; k < 12; ++k) {
                SystemSpec s = reference(eta, 2 * pi * k / 12);
                s.omega_m[1] = w2;
                std::get<Linearized>(s.drive).g_lin = {0.07, 0.11};
                const auto h = hybrid_transform(s);
                power = std::max(power, std::abs(std::norm(h.g_tilde_plus) + std::norm(h.g_tilde_minus) - (0.0049 + 0.0121)));
            }
    o.require(power <= 1e-12, "coupling power drift " + fmt(power));
    if (o.pass) o.detail = "mismatch " + fmt(mismatch) + ", power drift " + fmt(power);
    return o;
}

Outcome lambda_system() {
    Outcome o;
    double residual = 0;
    for (int i = 0; i <= 20; ++i) {
        const double eta = 0.01 + 1.99 * i / 20;
        for (int k = 0; k < 64; ++k) {
            const auto le = lambda_eigensystem(LambdaSystem::symmetric(eta, 2 * pi * k / 64));
            residual = std::max(residual, le.cubic_residual);
            o.require(le.dark_index.has_value() == (k % 32 == 0), "dark detection wrong at eta=" + fmt(eta) + " k=" + std::to_string(k));
        }
    }
    o.require(residual <= 1e-10, "cubic residual " + fmt(residual));
    for (int n = 0; n <= 3; ++n) {
        for (double eta : {0.3, 0.5, 1.5}) {
            const auto le = lambda_eigensystem(LambdaSystem::symmetric(eta, n * pi));
            const double expect = (n % 2 == 0 ? -1.0 : 1.0) * eta;
            int d = 0;
            for (int s = 1; s < 3; ++s)
                if (std::abs(le.lambdas[s] - expect) < std::abs(le.lambdas[d] - expect)) d = s;
            o.require(std::abs(le.lambdas[d] - expect) <= 1e-12, "lambda_1 wrong at n=" + std::to_string(n));
            const auto& v = le.vectors[d];
            const cplx ph = v[2] / std::abs(v[2]);
            const bool printed = std::abs(v[0]) <= 1e-12 && std::abs(v[1] / ph + 1 / std::sqrt(2.0)) <= 1e-12 &&
                                 std::abs(v[2] / ph - 1 / std::sqrt(2.0)) <= 1e-12;
            o.require(printed, "dark vector wrong at n=" + std::to_string(n));
        }
    }
    if (o.pass) o.detail = "max cubic residual " + fmt(residual);
    return o;
}

std::string csv_body(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') out += line + "\n";
    return out;
}

std::string without_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.find("timestamp") == std::string::npos) out += line + "\n";
    return out;
}

std::string invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) throw std::runtime_error("command failed: " + err.str());
    return out.str();
}

Outcome determinism() {
    Outcome o;
    for (const char* preset : {"fig2", "figS4", "figS12"}) {
        const auto serial = invoke({"sweep", "--preset", preset, "--workers", "1"});
        const auto parallel = invoke({"sweep", "--preset", preset, "--workers", "4"});
        o.require(csv_body(serial) == csv_body(parallel), std::string("serial and parallel bodies differ for ") + preset);
        o.require(without_timestamp(serial) == without_timestamp(invoke({"sweep", "--preset", preset, "--workers", "1"})),
                  std::string("repeated sweep differs for ") + preset);
    }
    for (const auto& args : std::vector<std::vector<std::string>>{{"cool", "--preset", "fig2"},
                                                                  {"spectrum", "--preset", "figS6", "--workers", "3"},
                                                                  {"modes", "--preset", "figS11"},
                                                                  {"limits", "--preset", "fig4"},
                                                                  {"lambda", "--preset", "lambda", "--theta-points", "17"}})
        o.require(without_timestamp(invoke(args)) == without_timestamp(invoke(args)), "repeated " + args[0] + " differs");
    if (o.pass) o.detail = "sweeps, spectrum and reports reproducible";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"dark-mode ceiling (N=2)", dark_mode_ceiling},
        {"dark-mode breaking", dark_mode_breaking},
        {"N-mode ceiling", n_mode_ceiling},
        {"nonreciprocity", nonreciprocity},
        {"cooling-limit agreement", cooling_limit_agreement},
        {"RWA validity", rwa_validity},
        {"oracle equivalence", oracle_equivalence},
        {"mode structure", mode_structure},
        {"Lambda system", lambda_system},
        {"determinism and parallelism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
