#include "loopcool/numkit.hpp"

#include <cmath>
#include <string>

namespace loopcool {

namespace {

constexpr double blow_up_limit = 1e12;

CMatrix rk4_step(const CMatrix& a, const CMatrix& at, const CMatrix& rhs, const CMatrix& x, double dt) {
    auto f = [&](const CMatrix& y) -> CMatrix { return a * y + y * at + rhs; };
    const CMatrix k1 = f(x);
    const CMatrix k2 = f(x + (0.5 * dt) * k1);
    const CMatrix k3 = f(x + (0.5 * dt) * k2);
    const CMatrix k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_blow_up(const CMatrix& x, double t) {
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double m = std::abs(x(i, j));
            if (!(m <= blow_up_limit))
                throw BlowUp("entry magnitude exceeds 1e12 at t=" + std::to_string(t));
        }
}

}  // namespace

double default_ode_step(const CMatrix& a) {
    double scale = 0;
    if (a.size() > 0) {
        Eigen::JacobiSVD<CMatrix> svd(a);
        scale = svd.singularValues()(0);
        for (Eigen::Index i = 0; i < a.rows(); ++i) scale = std::max(scale, std::abs(a(i, i).real()));
    }
    if (scale == 0) scale = 1;
    return 0.01 / scale;
}

CMatrix integrate_linear_ode(const CMatrix& a, const CMatrix& rhs_const, const CMatrix& x0, double t_end,
                             const OdeOptions& opts) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw ShapeMismatch("integrate_linear_ode needs a square drift");
    if (rhs_const.rows() != n || rhs_const.cols() != n || x0.rows() != n || x0.cols() != n)
        throw ShapeMismatch("integrate_linear_ode operands must match the drift dimension");
    if (!(t_end >= 0)) throw DomainError("t_end must be non-negative");
    const double dt_req = opts.dt > 0 ? opts.dt : default_ode_step(a);
    if (t_end == 0) return x0;
    const long long steps = static_cast<long long>(std::ceil(t_end / dt_req));
    const double dt = t_end / static_cast<double>(steps);
    const CMatrix at = a.transpose();

    bool stepping = opts.mode == OdeMode::Stepping ||
                    (opts.mode == OdeMode::Auto && steps <= opts.stepping_limit);
    if (stepping) {
        CMatrix x = x0;
        for (long long s = 0; s < steps; ++s) {
            x = rk4_step(a, at, rhs_const, x, dt);
            check_blow_up(x, dt * static_cast<double>(s + 1));
        }
        return x;
    }

    // One RK4 step is affine in vec(X); raise its augmented matrix to the step count.
    const Eigen::Index m = n * n;
    CMatrix step(m + 1, m + 1);
    step.setZero();
    const CMatrix zero = CMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        CMatrix e = CMatrix::Zero(n, n);
        e(k % n, k / n) = 1.0;
        const CMatrix img = rk4_step(a, at, zero, e, dt);
        step.col(k).head(m) = img.reshaped();
    }
    step.col(m).head(m) = rk4_step(a, at, rhs_const, zero, dt).reshaped();
    step(m, m) = 1.0;

    CVector state(m + 1);
    state.head(m) = x0.reshaped();
    state(m) = 1.0;
    CMatrix base = step;
    long long left = steps;
    while (left > 0) {
        if (left & 1) state = base * state;
        left >>= 1;
        if (left > 0) base = base * base;
        for (Eigen::Index i = 0; i < m; ++i)
            if (!(std::abs(state(i)) <= blow_up_limit)) throw BlowUp("entry magnitude exceeds 1e12");
    }
    CMatrix x = state.head(m).reshaped(n, n);
    check_blow_up(x, t_end);
    return x;
}

}  // namespace loopcool
