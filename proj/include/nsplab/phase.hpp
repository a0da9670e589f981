#pragma once

#include <string>
#include <vector>

#include "nsplab/cutoff.hpp"
#include "nsplab/semigroup.hpp"

namespace nsplab {

struct PhaseFamily {
    Variant variant = Variant::electron;
    double epsilon = 1e-2;
    double kappa0 = 1.0 / 200;
    DispersionSymbol symbol() const { return {variant, epsilon}; }
    CutoffParams cutoff() const { return {epsilon, kappa0}; }
};

// phi_jk(xi, eta) = (-1)^{j+1} b(xi) + (-1)^{k+1} b(eta) - b(xi + eta), j, k in {1, 2}.
double phase_value(int j, int k, const Vec3& xi, const Vec3& eta, const PhaseFamily& pf);

// (b(xi) + b(eta))^2 - b(xi+eta)^2, electron.
double quantity_A(const Vec3& xi, const Vec3& eta, double eps);
// The same quantity expanded: 1 + 2 b b - 2 xi.eta - eps^2 (|xi|^4 + |eta|^4 - |xi+eta|^4).
double quantity_A_expanded(const Vec3& xi, const Vec3& eta, double eps);

// m(zeta, eta) = chit(zeta) chit(eta) chit(zeta+eta) <zeta+eta> / (2i b(zeta+eta)).
cplx nf_symbol(const Vec3& zeta, const Vec3& eta, const PhaseFamily& pf);
// m / phi_jk^power, zero off the triple support.
cplx nf_divided(int j, int k, int power, const Vec3& zeta, const Vec3& eta, const PhaseFamily& pf);

// Radius beyond which chit_{eps,k0} vanishes.
inline double tilde_support_radius(const CutoffParams& p) { return 4 * std::sqrt(p.kappa0 / p.epsilon); }

struct PhaseScanLevel {
    int n = 0;                   // samples per axis of the (|xi|, |eta|, cos) grid
    long points = 0;             // grid points inside the triple support
    double min_phi11 = 0;
    double min_A = 0;
    double cstar = 0;            // max (1/phi11) / min(b(xi), b(eta), b(xi+eta))
    double cstar_at_r1 = 0, cstar_at_r2 = 0, cstar_at_cos = 0;
    double identity_err = 0;     // max |A/phi11 - (b + b + b)| relative
    double expansion_err = 0;    // max |A - A_expanded| relative
};

struct PhaseScanReport {
    double epsilon = 0, kappa0 = 0;
    std::vector<PhaseScanLevel> levels;
    double a_bound = 0;          // 1 - 32 k0^2
    double refinement_factor = 0;  // max over successive levels of cstar ratio
    bool pass = false;
};

// Scans phi11, A and the reciprocal-phase ratio on nested grids n, 2n-1, ...
// Points are (xi, eta) = (r1 e1, r2 (c e1 + sqrt(1-c^2) e2)), which covers every
// relative configuration because all three quantities are rotation invariant.
PhaseScanReport reciprocal_phase_bound_scan(const PhaseFamily& pf, int n0, int levels);

struct DerivativeScanLevel {
    int n = 0;  // points per axis of the 4D (xi, eta) grid in the plane
    double ratio_phi = 0;   // max |d^a d^b (m/phi)| / min<.>
    double ratio_phi2 = 0;  // max |d^a d^b (m/phi^2)| / min<.>^2
    double max_richardson_gap = 0;  // max |D_h - D_2h| over max |D_h|
};

struct DerivativeScanReport {
    double epsilon = 0, kappa0 = 0;
    int max_order = 2;
    std::vector<DerivativeScanLevel> levels;
    double refinement_factor = 0;
    bool pass = false;
    std::vector<std::string> flags;
};

// Central differences of (xi, eta) -> (m/phi_jk^p)(xi - eta, eta) in d = 2, all
// (j, k), p in {1, 2}, orders |alpha| + |beta| <= max_order (<= 2), step 1e-4 <xi>.
DerivativeScanReport symbol_derivative_scan(const PhaseFamily& pf, int n0, int levels, int max_order = 2,
                                            double stable_factor = 1.10);

}  // namespace nsplab
