#include "loopcool/model.hpp"

#include <cmath>
#include <numbers>

namespace loopcool {

namespace {

const cplx I{0.0, 1.0};

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidSpec(msg);
}

void require_size(const std::vector<double>& v, std::size_t n, const char* name) {
    require(v.size() == n, std::string(name) + " has " + std::to_string(v.size()) + " entries, expected " +
                               std::to_string(n));
}

void require_all(const std::vector<double>& v, bool (*pred)(double), const char* name, const char* rule) {
    for (double x : v) require(std::isfinite(x) && pred(x), std::string(name) + " must be " + rule);
}

}  // namespace

double SystemSpec::delta() const {
    if (!is_linearized()) throw InvalidSpec("drive is Physical; linearize first");
    return std::get<Linearized>(drive).delta;
}

const std::vector<double>& SystemSpec::g_lin() const {
    if (!is_linearized()) throw InvalidSpec("drive is Physical; linearize first");
    return std::get<Linearized>(drive).g_lin;
}

double reduce_phase(double theta) {
    constexpr double two_pi = 2 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r = 0;
    return r;
}

std::string to_string(Coupling c) { return c == Coupling::FULL ? "full" : "rwa"; }

SystemSpec validated(SystemSpec spec) {
    require(spec.n_mech >= 1, "n_mech must be at least 1");
    const auto n = static_cast<std::size_t>(spec.n_mech);
    require_size(spec.omega_m, n, "omega_m");
    require_size(spec.gamma, n, "gamma");
    require_size(spec.nbar, n, "nbar");
    require_size(spec.eta, n - 1, "eta");
    if (spec.theta.empty()) spec.theta.assign(n - 1, 0.0);
    require_size(spec.theta, n - 1, "theta");
    require_all(spec.omega_m, [](double x) { return x > 0; }, "omega_m", "positive");
    require_all(spec.gamma, [](double x) { return x >= 0; }, "gamma", "non-negative");
    require_all(spec.nbar, [](double x) { return x >= 0; }, "nbar", "non-negative");
    require_all(spec.eta, [](double x) { return x >= 0; }, "eta", "non-negative");
    require_all(spec.theta, [](double) { return true; }, "theta", "finite");
    require(std::isfinite(spec.kappa) && spec.kappa >= 0, "kappa must be non-negative");
    for (double& t : spec.theta) t = reduce_phase(t);
    if (auto* lin = std::get_if<Linearized>(&spec.drive)) {
        require(std::isfinite(lin->delta), "delta must be finite");
        require_size(lin->g_lin, n, "g_lin");
        require_all(lin->g_lin, [](double x) { return x >= 0; }, "g_lin", "non-negative");
    } else {
        auto& phys = std::get<Physical>(spec.drive);
        require(std::isfinite(phys.delta_c), "delta_c must be finite");
        require(std::isfinite(phys.omega_drive_amp.real()) && std::isfinite(phys.omega_drive_amp.imag()),
                "drive amplitude must be finite");
        require_size(phys.g_single, n, "g_single");
        require_all(phys.g_single, [](double x) { return x >= 0; }, "g_single", "non-negative");
    }
    return spec;
}

SystemSpec uniform_spec(int n_mech, double delta, double g, double kappa, double gamma, double nbar, double eta,
                        const std::vector<double>& theta) {
    SystemSpec s;
    s.n_mech = n_mech;
    const auto n = static_cast<std::size_t>(std::max(n_mech, 1));
    s.omega_m.assign(n, 1.0);
    s.kappa = kappa;
    s.gamma.assign(n, gamma);
    s.nbar.assign(n, nbar);
    s.eta.assign(n - 1, eta);
    s.theta = theta;
    if (s.theta.empty()) s.theta.assign(n - 1, 0.0);
    s.drive = Linearized{delta, std::vector<double>(n, g)};
    return validated(s);
}

ClassicalSteadyState linearize(const SystemSpec& raw, double tolerance, int max_iterations) {
    const SystemSpec spec = validated(raw);
    const auto* phys = std::get_if<Physical>(&spec.drive);
    if (!phys) throw InvalidSpec("linearize needs a Physical drive");
    if (!(spec.kappa > 0)) throw InvalidSpec("linearize needs kappa > 0");
    const int n = spec.n_mech;
    const auto& g = phys->g_single;
    const cplx omega = phys->omega_drive_amp;

    auto detuning = [&](const std::vector<cplx>& beta) {
        double d = phys->delta_c;
        for (int j = 0; j < n; ++j) d += g[j] * 2.0 * beta[j].real();
        return d;
    };
    auto cavity = [&](double d) { return -I * std::conj(omega) / (spec.kappa + I * d); };
    auto mechanics = [&](const std::vector<cplx>& beta, double alpha_sq) {
        std::vector<cplx> out(n);
        for (int j = 0; j < n; ++j) {
            cplx force = g[j] * alpha_sq;
            if (j + 1 < n) force += spec.eta[j] * std::exp(I * spec.theta[j]) * beta[j + 1];
            if (j > 0) force += spec.eta[j - 1] * std::exp(-I * spec.theta[j - 1]) * beta[j - 1];
            out[j] = -I * force / (spec.gamma[j] + I * spec.omega_m[j]);
        }
        return out;
    };

    std::vector<cplx> beta(n, cplx{0.0, 0.0});
    int it = 0;
    bool converged = false;
    while (it < max_iterations) {
        ++it;
        const double d = detuning(beta);
        const double alpha_sq = std::norm(cavity(d));
        const auto target = mechanics(beta, alpha_sq);
        double change = 0, size = 0;
        for (int j = 0; j < n; ++j) {
            const cplx next = 0.5 * beta[j] + 0.5 * target[j];
            change = std::max(change, std::abs(next - beta[j]));
            size = std::max(size, std::abs(next));
            beta[j] = next;
        }
        if (!std::isfinite(change) || size > 1e150) throw NoFixedPoint("mechanical amplitudes diverge");
        if (change <= tolerance * size || size == 0) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NoFixedPoint("no convergence within " + std::to_string(max_iterations) + " iterations");

    ClassicalSteadyState out;
    out.beta = beta;
    out.delta_eff = detuning(beta);
    const cplx alpha0 = cavity(out.delta_eff);
    const double mag = std::abs(alpha0);
    out.omega_drive_used = mag > 0 ? omega * std::exp(I * std::arg(alpha0)) : omega;
    out.alpha = cplx{mag, 0.0};
    out.g_lin.resize(n);
    for (int j = 0; j < n; ++j) out.g_lin[j] = g[j] * mag;
    out.iterations = it;
    return out;
}

SystemSpec to_linearized(const SystemSpec& spec) {
    if (spec.is_linearized()) return validated(spec);
    const auto css = linearize(spec);
    SystemSpec out = spec;
    out.drive = Linearized{css.delta_eff, css.g_lin};
    return validated(out);
}

DriftModel build_drift(const SystemSpec& raw, const CouplingApprox& approx) {
    const SystemSpec spec = to_linearized(raw);
    const int n = spec.n_mech;
    const double delta = spec.delta();
    const auto& G = spec.g_lin();
    DriftModel m;
    m.n_mech = n;
    m.approx = approx;
    m.kappa = spec.kappa;
    m.gamma = spec.gamma;
    const Eigen::Index dim = 2 * n + 2;
    CMatrix& A = m.a;
    A = CMatrix::Zero(dim, dim);
    const auto a = DriftModel::cav();
    const auto ad = m.cav_dag();

    A(a, a) = -(spec.kappa + I * delta);
    A(ad, ad) = -(spec.kappa - I * delta);
    for (int j = 0; j < n; ++j) {
        const auto b = m.mech(j), bd = m.mech_dag(j);
        const cplx g = G[j];
        A(b, b) = -(spec.gamma[j] + I * spec.omega_m[j]);
        A(bd, bd) = -(spec.gamma[j] - I * spec.omega_m[j]);
        A(a, b) = -I * g;
        A(b, a) = -I * std::conj(g);
        A(ad, bd) = I * std::conj(g);
        A(bd, ad) = I * g;
        if (approx.optomechanical == Coupling::FULL) {
            A(a, bd) = -I * g;
            A(b, ad) = -I * g;
            A(ad, b) = I * std::conj(g);
            A(bd, a) = I * std::conj(g);
        }
    }
    for (int j = 0; j + 1 < n; ++j) {
        const cplx e = spec.eta[j] * std::exp(I * spec.theta[j]);
        const auto b1 = m.mech(j), b2 = m.mech(j + 1);
        const auto b1d = m.mech_dag(j), b2d = m.mech_dag(j + 1);
        A(b1, b2) += -I * e;
        A(b2, b1) += -I * std::conj(e);
        A(b1d, b2d) += I * std::conj(e);
        A(b2d, b1d) += I * e;
        if (approx.mechanical == Coupling::FULL) {
            A(b1, b2d) += -I * e;
            A(b2, b1d) += -I * e;
            A(b1d, b2) += I * std::conj(e);
            A(b2d, b1) += I * std::conj(e);
        }
    }
    const auto noise = build_noise(spec);
    m.c = noise.c;
    m.q = noise.q;
    return m;
}

NoiseMatrices build_noise(const SystemSpec& raw) {
    const SystemSpec spec = validated(raw);
    const int n = spec.n_mech;
    const Eigen::Index dim = 2 * n + 2;
    NoiseMatrices out;
    out.c = CMatrix::Zero(dim, dim);
    out.c(0, n + 1) = 2.0 * spec.kappa;
    for (int j = 0; j < n; ++j) {
        out.c(1 + j, n + 2 + j) = 2.0 * spec.gamma[j] * (spec.nbar[j] + 1.0);
        out.c(n + 2 + j, 1 + j) = 2.0 * spec.gamma[j] * spec.nbar[j];
    }
    out.q = 0.5 * (out.c + out.c.transpose());
    return out;
}

}  // namespace loopcool
