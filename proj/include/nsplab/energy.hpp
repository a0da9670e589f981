#pragma once
// Energy functionals, energy-inequality residuals and decay bookkeeping for
// the main and perturbation systems.

#include <array>
#include <string>
#include <vector>

#include "nsplab/dispersive.hpp"
#include "nsplab/phase.hpp"
#include "nsplab/solver.hpp"

namespace nsplab {

using MultiIndex = std::array<int, 3>;

std::vector<MultiIndex> multi_indices(int dim, int order);  // all alpha with |alpha| = order
SpectralField derivative(const SpectralField& f, const MultiIndex& alpha);

// sum_{|alpha| = k} |d^alpha f|^2, and the same summed over |alpha| <= N.
double seminorm_sq(const SpectralField& f, int k);
double sobolev_sq(const SpectralField& f, int N);
// sum_{|alpha| <= m} sup |d^alpha f|
double w_inf(const SpectralField& f, int m);

// E_N = sum_{|alpha| <= N} int |d^a rho|^2/2 + |d^a grad phi|^2/2 + rho_tot |d^a u|^2/2.
// With density_weight = false rho_tot is replaced by 1.
double energy_EN(const FluidState& s, int N, bool density_weight = true);
// |U|^2_{H^N} in the same multi-index sum, unweighted and without the 1/2.
double state_sobolev_sq(const FluidState& s, int N);
// eps sum_{|alpha| <= N} int rho_tot |d^alpha grad u|^2
double dissipation_N(const FluidState& s, int N, bool density_weight = true);
// Exact dissipation of the unweighted energy along the linear flow:
// eps sum (|d^a grad u|^2 + |d^a div u|^2).
double linear_dissipation(const FluidState& s, int N);

// Fourth-order differences on equispaced samples, one-sided at the ends.
std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y);

struct EnergyLedger {
    std::vector<double> times, EN, dissipation, dEdt, majorant, residual;
    double sup_residual = 0;  // the fitted constant C_fit
};

// r(t) = (dE_N/dt + D_N) / ((|u|_{W^{1,inf}} + |rho|_{W^{1,inf}}) |U|^2_{H^N}), with 0/0 := 0.
EnergyLedger energy_inequality_residual(const std::vector<double>& t, const std::vector<FluidState>& states, int N,
                                        bool density_weight = true);

struct PerturbOptions {
    int M = 3;
    double C2 = 1.0;
    double delta = -1;  // negative: measured as sup_t |(rho, u)|_{H^3} of the main run
    double C7 = 0.125;
    double a = 1.1, b = 5.0 / 3.0 + 0.05;  // time weights of the combined majorant
};

struct PerturbEnergyPoint {
    double t = 0;
    double EM = 0, X = 0, EM_tilde = 0, E3 = 0;
    double n_HM = 0, v_HM = 0;
    bool sandwich_precondition = false;  // 8 C2 delta eps |X| <= EM / 2
    bool sandwich = false;               // EM / 2 <= EM_tilde <= 2 EM
    double damping = 0;                  // C7 eps |(n, grad v)|^2_{H^M}
    double lhs1 = 0, maj1 = 0, lhs2 = 0, maj2 = 0, lhs20 = 0, maj20 = 0;
    double perturb_H3 = 0;               // |(n, grad psi, v)|_{H^3}
};

struct PerturbEnergyReport {
    double epsilon = 0, delta = 0, C2 = 0;
    int M = 3;
    std::vector<PerturbEnergyPoint> points;
    bool sandwich_ok = true;         // sandwich holds wherever its precondition does
    bool cauchy_schwarz_ok = true;   // |X| <= |n|_{H^M} |v|_{H^M} everywhere
    double C_fit1 = 0, C_fit2 = 0, C_fit20 = 0;
    double damped_integral = 0;      // C7 eps int |(n, grad v)|^2_{H^M}
    double gronwall_constant = 0;    // sup_t (EM + damped) / (EM(0) + delta^3 eps^2)
    double sup_ratio = 0;            // sup_t |(n, grad psi, v)|_{H^3} / (delta0 eps)
    bool all_zero = false;
};

// times[i] matches pairs[i]; delta0 is the data-size parameter of the run.
PerturbEnergyReport perturb_energy_report(const std::vector<double>& t, const std::vector<SplitPair>& pairs,
                                          double delta0, const PerturbOptions& opt = {});

struct NegSobolevReport {
    double s = 0;
    std::vector<double> times, E;
    double E0 = 0, sup = 0;
    double C_recorded = 0;          // (sup - E0) / sqrt(sup), the self-consistency constant
    double max_interp_violation = 0;  // relative, over every field and state
    bool bounded = false;           // sup <= 2 E0 + C_recorded
    bool pass = false;
};

// E_{-s} = |L^{-s} n|^2 + |L^{-s} grad psi|^2 + |L^{-s} v|^2, L = |D|, 0 < s < 1/2.
NegSobolevReport neg_sobolev_track(const std::vector<double>& t, const std::vector<FluidState>& perturb, double s,
                                   double interp_tol = 1e-10);

// relative violation of |f|_{L2} <= |f|_{Hdot^-s}^{1/(1+s)} |f|_{Hdot^1}^{s/(1+s)}, 0 if it holds
double interpolation_violation(const SpectralField& f, double s);

struct DecayEntry {
    std::string name;
    DecayFit fit;
    double predicted = 0;
    double delta = 0;  // fitted minus predicted
    std::string label;
};

DecayEntry decay_report(const std::string& name, const std::vector<double>& t, const std::vector<double>& v,
                        double predicted, double t_min, double t_max, bool torus = true);

// Least-squares rate c in v ~ C e^{-c t}.
double fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v);

struct EpsDeltaRReport {
    double epsilon = 0;
    std::vector<double> times, weighted1, weighted2;
    double sup1 = 0, sup2 = 0;  // raw sups
    double norm0 = 0;           // |chi V(0)|_{H^k}
    double sup1_normalized = 0, sup2_normalized = 0;
    bool finite = false;
};

// sup_t (1+t) |eps Delta chi R|_{H^k} and sup_t (1+t)^{3/2 (1 - 2/p)} |(eps Delta)^2 chi R|_{H^k}
// over a V trajectory, R = Q^{-1} chi V.
EpsDeltaRReport eps_delta_r_decay_check(const std::vector<double>& t, const std::vector<SpectralField>& V,
                                        const PhaseFamily& pf, double k = 3, double p = 8);

}  // namespace nsplab
