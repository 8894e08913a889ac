#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "loopcool/model.hpp"

namespace loopcool {

inline constexpr double dark_tolerance = 1e-10;

struct BrightDarkModes {
    double omega_plus = 0, omega_minus = 0;
    double zeta = 0;
    double g_plus = 0;
    std::array<double, 2> weights{};  // (G_1, G_2) / G_+
    bool dark_mode_exists = false;
};

struct HybridModes {
    double omega_tilde_plus = 0, omega_tilde_minus = 0;
    double f = 0, h = 0;
    cplx g_tilde_plus, g_tilde_minus;
    double darkness = 0;  // min(|G~+|, |G~-|) / G_+
};

struct NormalModeAnalysis {
    int n = 0;
    bool closed_form = true;
    std::vector<double> omega_k;
    std::vector<cplx> coupling_k;
    std::vector<bool> dark_flags;
    int dark_count = 0;
    double predicted_uncooled = 0;  // nbar (N-1)/N
    double norm_a = 0;              // sqrt((N+1)/2)
    std::vector<double> numeric_omega;  // sorted eigenvalues of the mechanical block
    double max_frequency_mismatch = 0;
    std::vector<std::string> warnings;
};

struct LambdaSystem {
    double delta = 0;
    double omega1 = 1;
    double omega2 = 1;
    double omega_b = 0;
    double theta = 0;

    double eta_ratio() const { return omega_b / omega1; }
    static LambdaSystem symmetric(double eta, double theta);
};

struct CardanoTerms {
    double q = 0;
    double r = 0;
    cplx s1, s2;
};

// Amplitudes ordered (e, f, g); eigenvalues in units of omega1.
struct LambdaEigen {
    std::array<double, 3> lambdas{};
    std::array<std::array<cplx, 3>, 3> vectors{};
    std::array<double, 3> p_e{};
    std::optional<int> dark_index;
    std::optional<CardanoTerms> cardano;
    std::array<bool, 3> numeric_vector{};
    double cubic_residual = 0;
    double imag_residue = 0;
};

// Throws DomainError unless N = 2 and eta = 0.
BrightDarkModes bright_dark(const SystemSpec& spec);

HybridModes hybrid_transform(const SystemSpec& spec);

// Closed form for uniform parameters; numeric diagonalization with a warning otherwise.
NormalModeAnalysis normal_modes(const SystemSpec& spec);

// N x N single-excitation block: omega_j on the diagonal, eta_j e^{i theta_j} above it.
CMatrix mechanical_block(const SystemSpec& spec);

CMatrix lambda_matrix(const LambdaSystem& sys);

LambdaEigen lambda_eigensystem(const LambdaSystem& sys);

struct ShadowCheck {
    double detuning = 0;   // |omega_2 - omega_1|
    double linewidth = 0;  // max Gamma_l
    bool inside = false;
};

// Near-degenerate window |omega_2 - omega_1| <= Gamma_l.
ShadowCheck shadow_area(const SystemSpec& spec);

}  // namespace loopcool
