#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "loopcool/numkit.hpp"

namespace loopcool {

// Drive given directly by the effective detuning and linearized couplings.
struct Linearized {
    double delta = 1.0;
    std::vector<double> g_lin;
};

// Drive given by the bare cavity detuning, pump amplitude and single-photon couplings.
struct Physical {
    double delta_c = 1.0;
    cplx omega_drive_amp{0.0, 0.0};
    std::vector<double> g_single;
};

// All rates in units of the first mechanical frequency.
struct SystemSpec {
    int n_mech = 2;
    std::vector<double> omega_m;
    double kappa = 0.2;
    std::vector<double> gamma;
    std::vector<double> nbar;
    std::vector<double> eta;    // n_mech - 1 nearest-neighbour strengths
    std::vector<double> theta;  // n_mech - 1 phases
    std::variant<Linearized, Physical> drive = Linearized{};

    bool is_linearized() const { return std::holds_alternative<Linearized>(drive); }
    double delta() const;                        // requires Linearized
    const std::vector<double>& g_lin() const;    // requires Linearized
};

double reduce_phase(double theta);

// Checks list lengths and signs, reduces phases to [0, 2pi). Throws InvalidSpec.
SystemSpec validated(SystemSpec spec);

// Uniform-parameter spec with the Linearized drive.
SystemSpec uniform_spec(int n_mech, double delta, double g, double kappa, double gamma, double nbar, double eta,
                        const std::vector<double>& theta);

struct ClassicalSteadyState {
    cplx alpha;
    std::vector<cplx> beta;
    double delta_eff = 0;
    std::vector<double> g_lin;
    cplx omega_drive_used;  // pump amplitude after the phase rotation making alpha real
    int iterations = 0;
};

enum class Coupling { FULL, RWA };

struct CouplingApprox {
    Coupling optomechanical = Coupling::FULL;
    Coupling mechanical = Coupling::RWA;
};

std::string to_string(Coupling c);

// Fluctuation ordering u = [da, db_1..db_N, da^dag, db_1^dag..db_N^dag].
struct DriftModel {
    int n_mech = 0;
    CMatrix a;
    CMatrix q;
    CMatrix c;
    CouplingApprox approx;
    double kappa = 0;
    std::vector<double> gamma;

    Eigen::Index dim() const { return a.rows(); }
    static Eigen::Index cav() { return 0; }
    Eigen::Index mech(int j) const { return 1 + j; }
    Eigen::Index cav_dag() const { return n_mech + 1; }
    Eigen::Index mech_dag(int j) const { return n_mech + 2 + j; }
};

ClassicalSteadyState linearize(const SystemSpec& spec, double tolerance = 1e-12, int max_iterations = 10000);

// Replaces a Physical drive by the Linearized one from linearize().
SystemSpec to_linearized(const SystemSpec& spec);

DriftModel build_drift(const SystemSpec& spec, const CouplingApprox& approx = {});

struct NoiseMatrices {
    CMatrix c;
    CMatrix q;
};

NoiseMatrices build_noise(const SystemSpec& spec);

}  // namespace loopcool
