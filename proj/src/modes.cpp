#include "loopcool/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "loopcool/limits.hpp"

namespace loopcool {

namespace {

const cplx I{0.0, 1.0};

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

template <typename T>
bool uniform(const std::vector<T>& v) {
    return std::all_of(v.begin(), v.end(), [&](const T& x) { return nearly_equal(x, v.front()); });
}

}  // namespace

BrightDarkModes bright_dark(const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    if (spec.n_mech != 2) throw DomainError("bright/dark decomposition needs n_mech = 2");
    if (spec.eta[0] != 0) throw DomainError("bright/dark decomposition needs eta = 0");
    const double G1 = spec.g_lin()[0], G2 = spec.g_lin()[1];
    const double w1 = spec.omega_m[0], w2 = spec.omega_m[1];
    const double s = G1 * G1 + G2 * G2;
    if (!(s > 0)) throw DomainError("bright/dark decomposition needs a nonzero coupling");
    BrightDarkModes m;
    m.omega_plus = (G1 * G1 * w1 + G2 * G2 * w2) / s;
    m.omega_minus = (G2 * G2 * w1 + G1 * G1 * w2) / s;
    m.zeta = G1 * G2 * (w1 - w2) / s;
    m.g_plus = std::sqrt(s);
    m.weights = {G1 / m.g_plus, G2 / m.g_plus};
    m.dark_mode_exists = std::abs(m.zeta) <= dark_tolerance * m.g_plus;
    return m;
}

HybridModes hybrid_transform(const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    if (spec.n_mech != 2) throw DomainError("hybrid transform needs n_mech = 2");
    const double G1 = spec.g_lin()[0], G2 = spec.g_lin()[1];
    const double w1 = spec.omega_m[0], w2 = spec.omega_m[1];
    const double eta = spec.eta[0], th = spec.theta[0];
    HybridModes m;
    const double root = std::sqrt((w1 - w2) * (w1 - w2) + 4.0 * eta * eta);
    m.omega_tilde_plus = 0.5 * (w1 + w2 + root);
    m.omega_tilde_minus = 0.5 * (w1 + w2 - root);
    const double d = m.omega_tilde_minus - w1;
    const double den = std::sqrt(d * d + eta * eta);
    if (den == 0) {
        m.f = 1;
        m.h = 0;
    } else if (d == 0) {
        m.f = 0;
        m.h = -1;
    } else {
        m.f = std::abs(d) / den;
        m.h = eta * m.f / d;
    }
    m.g_tilde_plus = m.f * G1 - std::exp(-I * th) * m.h * G2;
    m.g_tilde_minus = std::exp(I * th) * m.h * G1 + m.f * G2;
    const double gp = std::sqrt(G1 * G1 + G2 * G2);
    m.darkness = gp > 0 ? std::min(std::abs(m.g_tilde_plus), std::abs(m.g_tilde_minus)) / gp : 0.0;
    return m;
}

CMatrix mechanical_block(const SystemSpec& raw) {
    const SystemSpec spec = validated(raw);
    const int n = spec.n_mech;
    CMatrix h = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) h(j, j) = spec.omega_m[j];
    for (int j = 0; j + 1 < n; ++j) {
        h(j, j + 1) = spec.eta[j] * std::exp(I * spec.theta[j]);
        h(j + 1, j) = std::conj(h(j, j + 1));
    }
    return h;
}

NormalModeAnalysis normal_modes(const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    const int n = spec.n_mech;
    const auto& G = spec.g_lin();
    NormalModeAnalysis out;
    out.n = n;
    out.norm_a = std::sqrt((n + 1) / 2.0);
    const double g_max = *std::max_element(G.begin(), G.end());
    const double nbar_mean = [&] {
        double s = 0;
        for (double x : spec.nbar) s += x;
        return s / n;
    }();
    out.predicted_uncooled = nbar_mean * (n - 1) / n;

    const CMatrix block = mechanical_block(spec);
    const auto ev = eigenvalues(block);
    if (!ev.convergence_flag) throw NoConvergence("mechanical block eigenvalues");
    for (const auto& v : ev.values) out.numeric_omega.push_back(v.real());
    std::sort(out.numeric_omega.begin(), out.numeric_omega.end());

    out.closed_form = uniform(spec.omega_m) && uniform(spec.eta) && uniform(G);
    if (out.closed_form) {
        const double wm = spec.omega_m[0];
        const double eta = n > 1 ? spec.eta[0] : 0.0;
        const double g = G[0];
        const double step = std::numbers::pi / (n + 1);
        for (int k = 1; k <= n; ++k) {
            out.omega_k.push_back(wm + 2.0 * eta * std::cos(k * step));
            cplx sum = std::sin(k * step);
            double phase = 0;
            for (int j = 2; j <= n; ++j) {
                phase += spec.theta[j - 2];
                sum += std::exp(I * phase) * std::sin(j * k * step);
            }
            out.coupling_k.push_back(g / out.norm_a * sum);
        }
        std::vector<double> sorted = out.omega_k;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < n; ++k)
            out.max_frequency_mismatch = std::max(out.max_frequency_mismatch, std::abs(sorted[k] - out.numeric_omega[k]));
    } else {
        out.warnings.push_back("non-uniform parameters: normal modes from numerical diagonalization");
        Eigen::SelfAdjointEigenSolver<CMatrix> es(block);
        for (int k = 0; k < n; ++k) {
            out.omega_k.push_back(es.eigenvalues()(k));
            cplx c = 0;
            for (int j = 0; j < n; ++j) c += G[j] * es.eigenvectors()(j, k);
            out.coupling_k.push_back(c);
            out.max_frequency_mismatch =
                std::max(out.max_frequency_mismatch, std::abs(es.eigenvalues()(k) - out.numeric_omega[k]));
        }
    }
    for (const auto& c : out.coupling_k) {
        const bool dark = std::abs(c) <= dark_tolerance * g_max;
        out.dark_flags.push_back(dark);
        out.dark_count += dark ? 1 : 0;
    }
    return out;
}

LambdaSystem LambdaSystem::symmetric(double eta, double theta) {
    LambdaSystem s;
    s.delta = 0;
    s.omega1 = 1;
    s.omega2 = 1;
    s.omega_b = eta;
    s.theta = theta;
    return s;
}

CMatrix lambda_matrix(const LambdaSystem& s) {
    CMatrix v(3, 3);
    v << s.delta, s.omega2, s.omega1,
         s.omega2, 0.0, s.omega_b * std::exp(I * s.theta),
         s.omega1, s.omega_b * std::exp(-I * s.theta), 0.0;
    return v;
}

LambdaEigen lambda_eigensystem(const LambdaSystem& sys) {
    if (sys.omega1 < 0 || sys.omega2 < 0 || sys.omega_b < 0) throw DomainError("Lambda amplitudes must be non-negative");
    const double unit = sys.omega1 > 0 ? sys.omega1 : 1.0;
    const CMatrix v = lambda_matrix(sys) / unit;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v);
    LambdaEigen out;

    const bool symmetric = sys.omega1 > 0 && nearly_equal(sys.omega1, sys.omega2) && sys.delta == 0;
    std::array<bool, 3> need_numeric{true, true, true};
    if (symmetric) {
        const double eta = sys.eta_ratio();
        const double c = std::cos(sys.theta);
        CardanoTerms ct;
        ct.q = -(2.0 + eta * eta) / 3.0;
        ct.r = eta * c;
        const double disc = ct.q * ct.q * ct.q + ct.r * ct.r;
        if (disc < 0) {
            ct.s1 = std::pow(cplx(ct.r, std::sqrt(-disc)), 1.0 / 3.0);
            ct.s2 = std::conj(ct.s1);
        } else {
            ct.s1 = std::cbrt(ct.r + std::sqrt(disc));
            ct.s2 = std::cbrt(ct.r - std::sqrt(disc));
        }
        const cplx sum = ct.s1 + ct.s2;
        const cplx rot = I * (std::sqrt(3.0) / 2.0) * (ct.s1 - ct.s2);
        const std::array<cplx, 3> roots{sum, -0.5 * sum + rot, -0.5 * sum - rot};
        for (int s = 0; s < 3; ++s) {
            out.lambdas[s] = roots[s].real();
            out.imag_residue = std::max(out.imag_residue, std::abs(roots[s].imag()));
            const double l = out.lambdas[s];
            out.cubic_residual =
                std::max(out.cubic_residual, std::abs(l * l * l - (2.0 + eta * eta) * l - 2.0 * eta * c));
            const double den = l * l - 1.0;
            if (std::abs(den) > 1e-6) {
                const cplx ph = std::exp(I * sys.theta);
                std::array<cplx, 3> vec{(eta * ph + l) / den, (l * eta * ph + 1.0) / den, cplx(1.0, 0.0)};
                const double nrm = std::sqrt(std::norm(vec[0]) + std::norm(vec[1]) + 1.0);
                for (auto& x : vec) x /= nrm;
                out.vectors[s] = vec;
                need_numeric[s] = false;
            }
        }
        out.cardano = ct;
    } else {
        for (int s = 0; s < 3; ++s) out.lambdas[s] = es.eigenvalues()(s);
    }

    std::array<bool, 3> used{};
    for (int s = 0; s < 3; ++s) {
        if (!need_numeric[s]) continue;
        int best = -1;
        for (int k = 0; k < 3; ++k) {
            if (used[k]) continue;
            if (best < 0 || std::abs(es.eigenvalues()(k) - out.lambdas[s]) < std::abs(es.eigenvalues()(best) - out.lambdas[s]))
                best = k;
        }
        used[best] = true;
        std::array<cplx, 3> vec{es.eigenvectors()(0, best), es.eigenvectors()(1, best), es.eigenvectors()(2, best)};
        int anchor = std::abs(vec[2]) > 1e-12 ? 2 : (std::abs(vec[1]) > 1e-12 ? 1 : 0);
        const cplx ph = std::abs(vec[anchor]) / vec[anchor];
        for (auto& x : vec) x *= ph;
        out.vectors[s] = vec;
        out.numeric_vector[s] = true;
    }

    // Inside a degenerate pair, rotate so one member has no |e> amplitude.
    for (int s = 0; s < 3; ++s)
        for (int t = s + 1; t < 3; ++t) {
            if (std::abs(out.lambdas[s] - out.lambdas[t]) > 1e-8) continue;
            const auto u1 = out.vectors[s], u2 = out.vectors[t];
            std::array<cplx, 3> a{}, b{};
            for (int i = 0; i < 3; ++i) a[i] = u2[0] * u1[i] - u1[0] * u2[i];
            double na = 0;
            for (const auto& x : a) na += std::norm(x);
            if (na < 1e-24) continue;
            na = std::sqrt(na);
            for (auto& x : a) x /= na;
            cplx overlap = 0;
            for (int i = 0; i < 3; ++i) overlap += std::conj(a[i]) * u1[i];
            for (int i = 0; i < 3; ++i) b[i] = u1[i] - overlap * a[i];
            double nb = 0;
            for (const auto& x : b) nb += std::norm(x);
            if (nb < 1e-24) {
                for (int i = 0; i < 3; ++i) b[i] = u2[i];
                overlap = 0;
                for (int i = 0; i < 3; ++i) overlap += std::conj(a[i]) * u2[i];
                for (int i = 0; i < 3; ++i) b[i] -= overlap * a[i];
                nb = 0;
                for (const auto& x : b) nb += std::norm(x);
            }
            nb = std::sqrt(nb);
            for (auto& x : b) x /= nb;
            out.vectors[s] = a;
            out.vectors[t] = b;
        }

    int dark = 0;
    for (int s = 0; s < 3; ++s) {
        out.p_e[s] = std::norm(out.vectors[s][0]);
        if (out.p_e[s] < out.p_e[dark]) dark = s;
    }
    if (out.p_e[dark] <= dark_tolerance) out.dark_index = dark;
    return out;
}

ShadowCheck shadow_area(const SystemSpec& spec) {
    const auto eff = effective_model(spec, XiForm::Lorentzian);
    const SystemSpec s = to_linearized(spec);
    ShadowCheck c;
    c.detuning = std::abs(s.omega_m[1] - s.omega_m[0]);
    c.linewidth = std::max(eff.gamma_eff[0], eff.gamma_eff[1]);
    c.inside = c.detuning <= c.linewidth;
    return c;
}

}  // namespace loopcool
