#pragma once

#include <vector>

#include "loopcool/model.hpp"

namespace loopcool {

inline constexpr double stability_margin = 1e-12;
inline constexpr double lyapunov_margin = 1e-10;

struct CoolingReport {
    std::vector<double> n_f;
    double n_cav = 0;
    bool stable = false;
    double spectral_abscissa = 0;
    double residual = 0;
};

struct StabilityVerdict {
    bool stable = false;
    double abscissa = 0;
};

StabilityVerdict stability_check(const DriftModel& drift);

// Solves A V + V A^T = -Q through the Kronecker lift. Throws Unstable or SingularMatrix.
CMatrix lyapunov_solve(const DriftModel& drift);

double lyapunov_residual(const DriftModel& drift, const CMatrix& v);

// Reads occupations off V; stability fields are left at their defaults.
CoolingReport phonon_numbers(const CMatrix& v, int n_mech);

// Full pipeline. Unstable drifts give NaN occupations with stable = false.
CoolingReport solve_cooling(const DriftModel& drift);

}  // namespace loopcool
