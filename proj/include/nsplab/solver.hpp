#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nsplab/semigroup.hpp"
#include "nsplab/spectral.hpp"

namespace nsplab {

// Primitive unknowns: rho = density - 1 (or n for the perturbation), u velocity.
// The potential is derived on demand.
struct FluidState {
    Grid grid;
    Variant variant = Variant::electron;
    double epsilon = 1.0;
    double time = 0.0;
    SpectralField rho;  // scalar
    SpectralField u;    // vector

    FluidState() = default;
    FluidState(const Grid& g, Variant v, double eps);
    FluidState& axpy(double a, const FluidState& o);
};

// electron: Delta phi = rho (needs zero mean); ion: (Delta - 1) phi = rho.
SpectralField poisson_solve(const SpectralField& rho, Variant v);

struct RhsOptions {
    bool viscous = true;     // eps L u
    bool coupling = true;    // div u, grad rho, grad phi
    bool nonlinear = true;
    bool irrotational_reduction = false;  // main system: 2 eps Delta u in place of eps L u
    double density_floor = 0.1;
};

// Full tendencies (linear + nonlinear) of the three systems.
FluidState rhs_full(const FluidState& s, const RhsOptions& o = {});
FluidState rhs_main(const FluidState& s, const RhsOptions& o = {});
FluidState rhs_perturb(const FluidState& p, const FluidState& main, const RhsOptions& o = {});

// Exact solution operator of the linear part selected by o (same for all systems).
FluidState linear_propagate(double tau, const FluidState& s, const RhsOptions& o = {});

struct StepOptions {
    RhsOptions rhs;
    double cfl = 1.0;  // dt <= cfl * min(dx / max|u|, dx, 1)
};

void check_cfl(const FluidState& s, double dt, const StepOptions& o);

// Integrating-factor RK4 (Lawson): the linear part is advanced exactly, the rest explicitly.
FluidState step_full(const FluidState& s, double dt, const StepOptions& o = {});
FluidState step_main(const FluidState& s, double dt, const StepOptions& o = {});

struct SplitPair {
    FluidState main;     // (rho, u), starts from (rho0, P-perp u0)
    FluidState perturb;  // (n, v), starts from (0, P u0)
};
SplitPair make_split(const FluidState& full0);
// main and perturbation advanced as one coupled system
SplitPair step_split(const SplitPair& s, double dt, const StepOptions& o = {});

// |curl u| / max(|u|, tiny) in L2.
double curl_diagnostic(const SpectralField& u);

// sqrt(|rho|^2_{H^s} + |grad phi|^2_{H^s} + |u|^2_{H^s})
double state_norm(const FluidState& s, double sobolev = 3.0, bool with_potential = true);
FluidState difference(const FluidState& a, const FluidState& b);

// Symmetrized pair V = (h, c): h = (omega(D)/|D|) rho, c = div u / |D|.
SpectralField symmetrize(const FluidState& s);
// Inverse on the irrotational part; u is rebuilt as a gradient.
FluidState desymmetrize(const SpectralField& V, Variant v, double eps);
// Quadratic term of the V system for the irrotational main flow.
SpectralField bvv(const SpectralField& V, Variant v);
// V system step; linear part by the Green matrix.
SpectralField step_vform(const SpectralField& V, double dt, const DispersionSymbol& s, bool nonlinear = true);

struct InitialDataSpec {
    double delta0 = 0.01;
    double width = 2.0;           // Gaussian spectral envelope in |xi|
    std::uint64_t seed = 1;
    bool rotational = true;       // add P u0 of size delta0 * eps
    double rho_scale = 1.0;       // |rho0|_{H^3} = rho_scale * delta0
    double potential_scale = 1.0; // |P-perp u0|_{H^3} = potential_scale * delta0
    bool parity = false;          // even rho, odd u: keeps every velocity mean exactly zero
};
// Seeded band-limited real data: rho0 mean zero, dealiased, Hermitian.
FluidState make_initial_data(const Grid& g, Variant v, double eps, const InitialDataSpec& spec);

struct SplittingReport {
    double max_rel_dev = 0;  // max_t |full - (main + perturb)|_{H^3} / |full|_{H^3}
    double final_rel_dev = 0;
    double max_perturb_norm = 0;
    int steps = 0;
};
SplittingReport run_splitting_consistency(const FluidState& full0, double T, double dt,
                                          const StepOptions& o = {});

}  // namespace nsplab
