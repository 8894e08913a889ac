#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "loopcool/errors.hpp"

namespace loopcool {

using cplx = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = Mat<cplx>;
using CVector = Vec<cplx>;
using RMatrix = Mat<double>;
using RVector = Vec<double>;

inline constexpr Eigen::Index kron_dimension_cap = 4096;

template <typename Real>
struct EigenResult {
    std::vector<std::complex<Real>> values;
    bool convergence_flag = false;
    int iterations = 0;
};

// Max absolute row sum.
template <typename Derived>
typename Derived::RealScalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const auto v = m(i, j);
            if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) return false;
        }
    return true;
}

// Throws DomainError when any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!all_finite(m)) throw DomainError(std::string(what) + " has non-finite entries");
}

template <typename DA, typename DB>
Mat<typename DA::Scalar> kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                              Eigen::Index cap = kron_dimension_cap) {
    using Scalar = typename DA::Scalar;
    const Eigen::Index rows = a.rows() * b.rows();
    const Eigen::Index cols = a.cols() * b.cols();
    if (rows > cap || cols > cap)
        throw DimensionOverflow("kron result " + std::to_string(rows) + "x" + std::to_string(cols) +
                                " exceeds cap " + std::to_string(cap));
    Mat<Scalar> out(rows, cols);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// LU with partial pivoting and one refinement sweep.
template <typename DA, typename DB>
Mat<typename DA::Scalar> solve_linear(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    using Scalar = typename DA::Scalar;
    if (a.rows() != a.cols()) throw ShapeMismatch("solve_linear needs a square matrix");
    if (b.rows() != a.rows()) throw ShapeMismatch("solve_linear right-hand side has wrong row count");
    require_finite(a, "solve_linear matrix");
    require_finite(b, "solve_linear right-hand side");
    const Mat<Scalar> am = a;
    const auto scale = inf_norm(am);
    Eigen::PartialPivLU<Mat<Scalar>> lu(am);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    if (am.rows() > 0 && !(diag.minCoeff() >= 1e-14 * scale))
        throw SingularMatrix("pivot " + std::to_string(diag.minCoeff()) + " below 1e-14*|a|");
    Mat<Scalar> x = lu.solve(b);
    const Mat<Scalar> r = b - am * x;
    x += lu.solve(r);
    return x;
}

namespace detail {

// Rotation [c s; -conj(s) c] mapping (p, q) to (r, 0).
template <typename C>
void givens(const C& p, const C& q, typename C::value_type& c, C& s) {
    using std::abs;
    const auto ap = abs(p);
    const auto aq = abs(q);
    if (aq == 0) {
        c = 1;
        s = C(0);
        return;
    }
    if (ap == 0) {
        c = 0;
        s = C(1);
        return;
    }
    const auto nrm = std::hypot(ap, aq);
    c = ap / nrm;
    s = (p / ap) * std::conj(q) / nrm;
}

}  // namespace detail

// Single-shift complex QR on the Hessenberg form, Wilkinson shifts.
template <typename Derived>
EigenResult<typename Derived::RealScalar> eigenvalues(const Eigen::MatrixBase<Derived>& a,
                                                      int iterations_per_value = 30) {
    using Real = typename Derived::RealScalar;
    using C = std::complex<Real>;
    if (a.rows() != a.cols() || a.rows() < 1) throw ShapeMismatch("eigenvalues needs a non-empty square matrix");
    require_finite(a, "eigenvalues input");
    const Eigen::Index n = a.rows();
    EigenResult<Real> res;
    Mat<C> h;
    if (n > 2) {
        Eigen::HessenbergDecomposition<Mat<C>> hess(a.template cast<C>());
        h = hess.matrixH();
    } else {
        h = a.template cast<C>();
    }
    const Real eps = std::numeric_limits<Real>::epsilon();
    const Real total = std::max(inf_norm(h), std::numeric_limits<Real>::min());
    std::vector<C> vals(static_cast<std::size_t>(n));
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    const int cap = iterations_per_value * static_cast<int>(n);
    Eigen::Index hi = n - 1;
    int since = 0;
    std::vector<Real> cs(static_cast<std::size_t>(n));
    std::vector<C> ss(static_cast<std::size_t>(n));
    while (hi >= 0) {
        Eigen::Index l = hi;
        while (l > 0) {
            Real s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (s == 0) s = total;
            if (std::abs(h(l, l - 1)) <= eps * s) {
                h(l, l - 1) = C(0);
                break;
            }
            --l;
        }
        if (l == hi) {
            vals[static_cast<std::size_t>(hi)] = h(hi, hi);
            done[static_cast<std::size_t>(hi)] = true;
            --hi;
            since = 0;
            continue;
        }
        if (res.iterations >= cap) break;
        ++res.iterations;
        ++since;

        C mu;
        if (since % 11 == 10) {
            mu = h(hi, hi) + C(std::abs(std::real(h(hi, hi - 1))) + std::abs(std::imag(h(hi, hi - 1))));
        } else {
            const C p = h(hi - 1, hi - 1), q = h(hi - 1, hi), r = h(hi, hi - 1), d = h(hi, hi);
            const C half = (p - d) / Real(2);
            const C disc = std::sqrt(half * half + q * r);
            const C m1 = (p + d) / Real(2) + disc;
            const C m2 = (p + d) / Real(2) - disc;
            mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
        }

        for (Eigen::Index k = l; k <= hi; ++k) h(k, k) -= mu;
        for (Eigen::Index k = l; k < hi; ++k) {
            Real c;
            C s;
            detail::givens(h(k, k), h(k + 1, k), c, s);
            cs[static_cast<std::size_t>(k)] = c;
            ss[static_cast<std::size_t>(k)] = s;
            for (Eigen::Index j = k; j <= hi; ++j) {
                const C x = h(k, j), y = h(k + 1, j);
                h(k, j) = c * x + s * y;
                h(k + 1, j) = -std::conj(s) * x + c * y;
            }
        }
        for (Eigen::Index k = l; k < hi; ++k) {
            const Real c = cs[static_cast<std::size_t>(k)];
            const C s = ss[static_cast<std::size_t>(k)];
            for (Eigen::Index i = l; i <= k + 1; ++i) {
                const C x = h(i, k), y = h(i, k + 1);
                h(i, k) = c * x + std::conj(s) * y;
                h(i, k + 1) = -s * x + c * y;
            }
        }
        for (Eigen::Index k = l; k <= hi; ++k) h(k, k) += mu;
    }
    res.convergence_flag = hi < 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (done[static_cast<std::size_t>(i)]) res.values.push_back(vals[static_cast<std::size_t>(i)]);
    return res;
}

// Largest real part; throws NoConvergence when the QR sweep stalls.
template <typename Derived>
typename Derived::RealScalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
    const auto ev = eigenvalues(a);
    if (!ev.convergence_flag) throw NoConvergence("eigenvalue iteration cap reached");
    auto best = -std::numeric_limits<typename Derived::RealScalar>::infinity();
    for (const auto& v : ev.values) best = std::max(best, std::real(v));
    return best;
}

enum class OdeMode { Auto, Stepping, Powering };

struct OdeOptions {
    double dt = 0;  // 0 selects 0.01 / max(|Re lambda|, ||a||_2)
    OdeMode mode = OdeMode::Auto;
    long long stepping_limit = 20000;
};

double default_ode_step(const CMatrix& a);

// RK4 for dX/dt = a X + X a^T + rhs_const.
CMatrix integrate_linear_ode(const CMatrix& a, const CMatrix& rhs_const, const CMatrix& x0, double t_end,
                             const OdeOptions& opts = {});

}  // namespace loopcool
