#include "loopcool/spectra.hpp"

#include <cmath>
#include <limits>

#include "loopcool/parallel.hpp"

namespace loopcool {

double Cooperativities::t_max() const {
    const double root = std::sqrt(c1 * c2) + std::sqrt(c3);
    const double den = c1 + c2 + c3 + 1.0;
    return 4.0 * root * root / (den * den);
}

Cooperativities cooperativities(const SystemSpec& raw) {
    const SystemSpec spec = to_linearized(raw);
    if (spec.n_mech != 2) throw DomainError("cooperativities are defined for two mechanical modes");
    const auto& G = spec.g_lin();
    Cooperativities c;
    c.c1 = G[0] * G[0] / (spec.gamma[0] * spec.kappa);
    c.c2 = G[1] * G[1] / (spec.gamma[1] * spec.kappa);
    c.c3 = spec.eta[0] * spec.eta[0] / (spec.gamma[0] * spec.gamma[1]);
    const double prod = c.c1 * c.c2;
    c.pi_ratio = prod > 0 ? c.c3 / prod : std::numeric_limits<double>::quiet_NaN();
    return c;
}

CMatrix scattering_matrix(const DriftModel& drift, double omega) {
    const Eigen::Index n = drift.dim();
    const int nm = drift.n_mech;
    RVector gam(n);
    gam(0) = std::sqrt(2.0 * drift.kappa);
    gam(nm + 1) = gam(0);
    for (int j = 0; j < nm; ++j) {
        gam(1 + j) = std::sqrt(2.0 * drift.gamma[j]);
        gam(nm + 2 + j) = gam(1 + j);
    }
    const CMatrix lhs = cplx(0.0, -omega) * CMatrix::Identity(n, n) - drift.a;
    const CMatrix rhs = gam.cast<cplx>().asDiagonal();
    const CMatrix x = solve_linear(lhs, rhs);
    return gam.cast<cplx>().asDiagonal() * x - CMatrix::Identity(n, n);
}

RMatrix transmittances(const CMatrix& u, int n_mech) {
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n_mech) + 2;
    if (n_mech < 1 || u.rows() != dim || u.cols() != dim)
        throw ShapeMismatch("scattering matrix does not match " + std::to_string(n_mech) + " mechanical modes");
    const Eigen::Index m = n_mech + 1;
    RMatrix t(m, m);
    for (Eigen::Index v = 0; v < m; ++v)
        for (Eigen::Index w = 0; w < m; ++w) t(v, w) = std::norm(u(v, w)) + std::norm(u(v, w + m));
    return t;
}

double lambda_analytic(const Cooperativities& coop, double theta) {
    const double prod = coop.c1 * coop.c2;
    if (!(prod > 0) || !std::isfinite(coop.pi_ratio)) throw DomainError("C1*C2 must be positive");
    const double p = coop.pi_ratio;
    const double sp = std::sqrt(p);
    const double c = std::cos(theta);
    const double tail = (coop.c1 + coop.c2 + 1.0) / prod + p;
    return 4.0 * sp * std::sin(theta) / ((1.0 + sp) * (1.0 + sp)) / (1.0 + 4.0 * p * c * c / (tail * tail));
}

RMatrix lambda_from_transmittances(const RMatrix& t, const Cooperativities& coop) {
    const double norm = coop.t_max();
    RMatrix l(t.rows(), t.cols());
    const double undefined = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index v = 0; v < t.rows(); ++v)
        for (Eigen::Index w = 0; w < t.cols(); ++w)
            l(v, w) = v == 0 || w == 0 ? (v == w ? 0.0 : undefined) : (t(v, w) - t(w, v)) / norm;
    return l;
}

RMatrix lambda_numeric(const DriftModel& drift, double omega, const Cooperativities& coop) {
    return lambda_from_transmittances(transmittances(scattering_matrix(drift, omega), drift.n_mech), coop);
}

ScatteringPoint scattering_point(const DriftModel& drift, double omega, const Cooperativities& coop) {
    ScatteringPoint p;
    p.omega = omega;
    p.u = scattering_matrix(drift, omega);
    p.t = transmittances(p.u, drift.n_mech);
    p.lambda_rel = lambda_from_transmittances(p.t, coop);
    return p;
}

std::vector<double> frequency_grid(double lo, double hi, int points) {
    if (points < 2) throw DomainError("frequency grid needs at least two points");
    if (!(hi > lo)) throw DomainError("frequency grid needs hi > lo");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    g.back() = hi;
    return g;
}

std::vector<double> default_frequency_grid(double omega_m) { return frequency_grid(0.9 * omega_m, 1.1 * omega_m, 801); }

std::vector<ScatteringPoint> scan(const DriftModel& drift, const std::vector<double>& grid,
                                  const Cooperativities& coop, int workers) {
    return parallel_map<ScatteringPoint>(grid.size(), workers,
                                         [&](std::size_t i) { return scattering_point(drift, grid[i], coop); });
}

}  // namespace loopcool
