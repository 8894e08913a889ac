#pragma once

#include <vector>

#include "loopcool/model.hpp"

namespace loopcool {

struct Cooperativities {
    double c1 = 0;
    double c2 = 0;
    double c3 = 0;
    double pi_ratio = 0;

    // Resonant maximum transmittance 4(sqrt(C1 C2) + sqrt(C3))^2 / (C1 + C2 + C3 + 1)^2.
    double t_max() const;
};

// Labels rows and columns as {a, b_1..b_N}; t(v, w) is the transmittance from w to v.
struct ScatteringPoint {
    double omega = 0;
    CMatrix u;
    RMatrix t;
    RMatrix lambda_rel;
};

// Two-mode cooperativities C_l = G_l^2/(gamma_l kappa), C_3 = eta^2/(gamma_1 gamma_2).
Cooperativities cooperativities(const SystemSpec& spec);

// U(omega) = Gamma (-i omega I - A)^{-1} Gamma - I.
CMatrix scattering_matrix(const DriftModel& drift, double omega);

RMatrix transmittances(const CMatrix& u, int n_mech);

// Closed-form Lambda_{b2 b1} at the resonant probe.
double lambda_analytic(const Cooperativities& coop, double theta);

// Lambda_{vw} = (T_vw - T_wv) / t_max, with the resonant normalizer at every omega.
// The normalizer only covers mechanical pairs; entries involving the cavity are NaN.
RMatrix lambda_numeric(const DriftModel& drift, double omega, const Cooperativities& coop);
RMatrix lambda_from_transmittances(const RMatrix& t, const Cooperativities& coop);

ScatteringPoint scattering_point(const DriftModel& drift, double omega, const Cooperativities& coop);

std::vector<double> frequency_grid(double lo, double hi, int points);
std::vector<double> default_frequency_grid(double omega_m);

// Evaluated on a bounded worker pool; results follow grid order.
std::vector<ScatteringPoint> scan(const DriftModel& drift, const std::vector<double>& grid,
                                  const Cooperativities& coop, int workers = 1);

}  // namespace loopcool
