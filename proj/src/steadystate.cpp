#include "loopcool/steadystate.hpp"

#include <cmath>
#include <limits>

namespace loopcool {

StabilityVerdict stability_check(const DriftModel& drift) {
    StabilityVerdict v;
    v.abscissa = spectral_abscissa(drift.a);
    v.stable = v.abscissa < -stability_margin;
    return v;
}

CMatrix lyapunov_solve(const DriftModel& drift) {
    const auto verdict = stability_check(drift);
    if (!(verdict.abscissa < -lyapunov_margin))
        throw Unstable("spectral abscissa " + std::to_string(verdict.abscissa) + " is not below -1e-10");
    const Eigen::Index n = drift.dim();
    const CMatrix eye = CMatrix::Identity(n, n);
    const CMatrix lift = kron(eye, drift.a) + kron(drift.a, eye);
    const CVector rhs = -drift.q.reshaped();
    const CVector x = solve_linear(lift, rhs);
    CMatrix v = x.reshaped(n, n);
    return v;
}

double lyapunov_residual(const DriftModel& drift, const CMatrix& v) {
    return inf_norm(CMatrix(drift.a * v + v * drift.a.transpose() + drift.q));
}

CoolingReport phonon_numbers(const CMatrix& v, int n_mech) {
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n_mech) + 2;
    if (n_mech < 1 || v.rows() != dim || v.cols() != dim)
        throw ShapeMismatch("covariance is " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                            ", expected " + std::to_string(dim) + "x" + std::to_string(dim));
    CoolingReport r;
    r.n_f.resize(static_cast<std::size_t>(n_mech));
    for (int j = 0; j < n_mech; ++j) r.n_f[j] = v(n_mech + 2 + j, 1 + j).real() - 0.5;
    r.n_cav = v(n_mech + 1, 0).real() - 0.5;
    return r;
}

CoolingReport solve_cooling(const DriftModel& drift) {
    const auto verdict = stability_check(drift);
    if (!(verdict.abscissa < -lyapunov_margin)) {
        CoolingReport r;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.n_f.assign(static_cast<std::size_t>(drift.n_mech), nan);
        r.n_cav = nan;
        r.residual = nan;
        r.stable = false;
        r.spectral_abscissa = verdict.abscissa;
        return r;
    }
    const CMatrix v = lyapunov_solve(drift);
    CoolingReport r = phonon_numbers(v, drift.n_mech);
    r.stable = verdict.stable;
    r.spectral_abscissa = verdict.abscissa;
    r.residual = lyapunov_residual(drift, v);
    return r;
}

}  // namespace loopcool
