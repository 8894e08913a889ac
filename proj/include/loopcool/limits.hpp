#pragma once

#include <array>
#include <string>
#include <vector>

#include "loopcool/model.hpp"

namespace loopcool {

enum class XiForm { Lorentzian, Resonant };

std::string to_string(XiForm f);

struct EffectiveTwoMode {
    XiForm form = XiForm::Lorentzian;
    cplx xi1, xi2;
    std::array<double, 2> gamma_eff{};
    std::array<double, 2> omega_eff{};
    std::array<double, 2> gamma_opt{};
    std::array<double, 2> omega_opt{};
    double chi1 = 0, chi2 = 0;
    double chi_plus = 0, chi_minus = 0;
    double n_opt = 0;
    double n_chi1 = 0, n_chi2 = 0;
    cplx lambda1, lambda2;
    cplx u_disc;

    // Resonant-sideband approximations, always filled.
    cplx xi1_resonant, xi2_resonant;
    std::array<double, 2> gamma_opt_resonant{};
    std::array<double, 2> omega_opt_resonant{};

    // (Gamma_1 + i Omega_1)(Gamma_2 + i Omega_2) - xi_1 xi_2
    cplx det_m() const;
};

struct CoolingLimit {
    double n1 = 0;
    double n2 = 0;
    XiForm form = XiForm::Lorentzian;
    std::vector<std::string> warnings;
};

// Adiabatic elimination of the cavity. Throws DomainError unless N = 2.
EffectiveTwoMode effective_model(const SystemSpec& spec, XiForm form = XiForm::Lorentzian);

CoolingLimit cooling_limit_simplified(const EffectiveTwoMode& eff, const SystemSpec& spec);
CoolingLimit cooling_limit_full(const EffectiveTwoMode& eff, const SystemSpec& spec);

struct LimitsReport {
    CoolingLimit simplified;  // resonant xi
    CoolingLimit full;        // Lorentzian xi
};

LimitsReport cooling_limits(const SystemSpec& spec);

// Copy of spec with the drive detuning set to omega_l (l is 1-based).
SystemSpec at_sideband(const SystemSpec& spec, int l);

std::vector<std::string> regime_warnings(const SystemSpec& spec);

}  // namespace loopcool
