#include "loopcool/limits.hpp"

#include <cmath>
#include <sstream>

namespace loopcool {

namespace {

const cplx I{0.0, 1.0};
constexpr double much_greater = 2.0;

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

std::string to_string(XiForm f) { return f == XiForm::Lorentzian ? "lorentzian" : "resonant"; }

cplx EffectiveTwoMode::det_m() const {
    return (gamma_eff[0] + I * omega_eff[0]) * (gamma_eff[1] + I * omega_eff[1]) - xi1 * xi2;
}

EffectiveTwoMode effective_model(const SystemSpec& raw, XiForm form) {
    const SystemSpec spec = to_linearized(raw);
    if (spec.n_mech != 2) throw DomainError("effective two-mode model needs n_mech = 2");
    const double k = spec.kappa, d = spec.delta();
    const double w1 = spec.omega_m[0], w2 = spec.omega_m[1];
    const double G1 = spec.g_lin()[0], G2 = spec.g_lin()[1];
    const double eta = spec.eta[0], th = spec.theta[0];
    const std::array<double, 2> G{G1, G2};
    const std::array<double, 2> w{w1, w2};

    EffectiveTwoMode e;
    e.form = form;
    for (int l = 0; l < 2; ++l) {
        const double g2 = G[l] * G[l];
        e.gamma_opt_resonant[l] = g2 / k;
        e.omega_opt_resonant[l] = g2 / (2.0 * w[l]);
    }
    e.xi1_resonant = -(G1 * G2 / k + I * (eta * std::exp(I * th) - G1 * G2 / (2.0 * w2)));
    e.xi2_resonant = -(G1 * G2 / k + I * (eta * std::exp(-I * th) - G1 * G2 / (2.0 * w1)));

    if (form == XiForm::Resonant) {
        e.gamma_opt = e.gamma_opt_resonant;
        e.omega_opt = e.omega_opt_resonant;
        e.xi1 = e.xi1_resonant;
        e.xi2 = e.xi2_resonant;
    } else {
        auto lor = [&](double x) { return k * k + x * x; };
        for (int l = 0; l < 2; ++l) {
            const double g2 = G[l] * G[l];
            e.gamma_opt[l] = g2 * k / lor(d - w[l]) - g2 * k / lor(d + w[l]);
            e.omega_opt[l] = g2 * (d + w[l]) / lor(d + w[l]) + g2 * (d - w[l]) / lor(d - w[l]);
        }
        auto xi = [&](double wo, double phase) {
            return G1 * G2 * (k + I * (d + wo)) / lor(d + wo) - G1 * G2 * (k - I * (d - wo)) / lor(d - wo) -
                   I * eta * std::exp(I * phase);
        };
        e.xi1 = xi(w2, th);
        e.xi2 = xi(w1, -th);
    }
    for (int l = 0; l < 2; ++l) {
        e.gamma_eff[l] = spec.gamma[l] + e.gamma_opt[l];
        e.omega_eff[l] = w[l] - e.omega_opt[l];
    }
    const double sum = e.gamma_eff[0] + e.gamma_eff[1];
    e.chi1 = std::norm(e.xi1) / sum;
    e.chi2 = std::norm(e.xi2) / sum;
    const double cross = (e.xi1 * e.xi2 / sum).real();
    e.chi_plus = -std::sqrt(e.chi1 * e.chi2) - cross;
    e.chi_minus = std::sqrt(e.chi1 * e.chi2) - cross;
    const double side = w1 + w2 + 2.0 * d;
    e.n_opt = 4.0 * k * k / (side * side);
    e.n_chi1 = 2.0 * (spec.gamma[1] * spec.nbar[1] + e.gamma_opt[1] * e.n_opt) / (sum + 2.0 * e.chi_plus);
    e.n_chi2 = 2.0 * (spec.gamma[0] * spec.nbar[0] + e.gamma_opt[0] * e.n_opt) / (sum + 2.0 * e.chi_plus);

    const cplx split = e.gamma_eff[0] - e.gamma_eff[1] + I * (e.omega_eff[0] - e.omega_eff[1]);
    e.u_disc = std::sqrt(4.0 * e.xi1 * e.xi2 + split * split);
    const cplx trace = sum + I * (e.omega_eff[0] + e.omega_eff[1]);
    e.lambda1 = 0.5 * (trace - e.u_disc);
    e.lambda2 = 0.5 * (trace + e.u_disc);
    return e;
}

std::vector<std::string> regime_warnings(const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    std::vector<std::string> out;
    double w_min = spec.omega_m[0], g_max = 0, g_min = spec.g_lin()[0], gam_max = 0;
    for (int j = 0; j < spec.n_mech; ++j) {
        w_min = std::min(w_min, spec.omega_m[j]);
        g_max = std::max(g_max, spec.g_lin()[j]);
        g_min = std::min(g_min, spec.g_lin()[j]);
        gam_max = std::max(gam_max, spec.gamma[j]);
    }
    if (w_min < much_greater * spec.kappa)
        out.push_back("omega >> kappa violated (omega/kappa = " + fmt(w_min / spec.kappa) + ")");
    if (spec.kappa < much_greater * g_max)
        out.push_back("kappa >> G violated (kappa/G = " + fmt(spec.kappa / g_max) + ")");
    if (g_min < much_greater * gam_max) out.push_back("G >> gamma violated");
    return out;
}

CoolingLimit cooling_limit_simplified(const EffectiveTwoMode& e, const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    CoolingLimit r;
    r.form = e.form;
    r.warnings = regime_warnings(spec);
    const double s1 = std::sqrt(e.chi1), s2 = std::sqrt(e.chi2);
    const double transfer = s1 * e.n_chi1 - s2 * e.n_chi2;
    std::array<double, 2> n{};
    for (int l = 0; l < 2; ++l) {
        const double bath = spec.gamma[l] * spec.nbar[l] + e.gamma_opt[l] * e.n_opt;
        const double sign = l == 0 ? 1.0 : -1.0;
        const double sl = l == 0 ? s1 : s2;
        n[l] = bath / (e.gamma_eff[l] + e.chi_plus) + sign * sl * transfer / (e.gamma_eff[l] + e.chi_minus);
        if (std::abs(e.gamma_eff[l] + e.chi_minus) < 0.1 * e.gamma_eff[l])
            r.warnings.push_back("Gamma_" + std::to_string(l + 1) + " + chi_- is within 10% of a pole");
    }
    r.n1 = n[0];
    r.n2 = n[1];
    return r;
}

CoolingLimit cooling_limit_full(const EffectiveTwoMode& e, const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    CoolingLimit r;
    r.form = e.form;
    r.warnings = regime_warnings(spec);
    const double ga = e.gamma_eff[0], gb = e.gamma_eff[1];
    if (std::abs(ga - gb) > 0.2 * std::max(ga, gb)) r.warnings.push_back("Gamma_1 and Gamma_2 differ by more than 20%");

    const double k = spec.kappa, d = spec.delta();
    const double G1 = spec.g_lin()[0], G2 = spec.g_lin()[1];
    const cplx l1 = e.lambda1, l2 = e.lambda2;
    auto inv = [](cplx x) { return 1.0 / x; };
    auto P = [&](cplx la, cplx lb) { return inv(k + lb + I * d) + inv(k + std::conj(la) - I * d); };
    const cplx a11 = inv(std::conj(l1) + l1), a12 = inv(std::conj(l1) + l2), a22 = inv(std::conj(l2) + l2);
    const double therm = a11.real() + 2.0 * a12.real() + a22.real();
    const double therm_m = a11.real() - 2.0 * a12.real() + a22.real();
    const cplx o11 = a11 * P(l1, l1), o12 = a12 * P(l1, l2), o22 = a22 * P(l2, l2);
    const double opt = o11.real() + 2.0 * o12.real() + o22.real();
    const double opt_m = o11.real() - 2.0 * o12.real() + o22.real();
    const double ratio = std::abs(e.xi1) / std::abs(e.xi2);
    const double g1n = spec.gamma[0] * spec.nbar[0], g2n = spec.gamma[1] * spec.nbar[1];
    r.n1 = g1n / 2.0 * therm + G1 * G1 / 4.0 * opt + ratio / 4.0 * (G2 * G2 * opt_m + 2.0 * g2n * therm_m);
    r.n2 = g2n / 2.0 * therm + G2 * G2 / 4.0 * opt + (1.0 / ratio) / 4.0 * (G1 * G1 * opt_m + 2.0 * g1n * therm_m);
    return r;
}

LimitsReport cooling_limits(const SystemSpec& spec) {
    const SystemSpec s = to_linearized(spec);
    LimitsReport r;
    r.simplified = cooling_limit_simplified(effective_model(s, XiForm::Resonant), s);
    r.full = cooling_limit_full(effective_model(s, XiForm::Lorentzian), s);
    return r;
}

SystemSpec at_sideband(const SystemSpec& spec, int l) {
    SystemSpec s = to_linearized(spec);
    if (l < 1 || l > s.n_mech) throw DomainError("mode index out of range");
    std::get<Linearized>(s.drive).delta = s.omega_m[static_cast<std::size_t>(l - 1)];
    return s;
}

}  // namespace loopcool
