#pragma once

#include <string>
#include <vector>

#include "nsplab/cutoff.hpp"
#include "nsplab/spectral.hpp"

namespace nsplab {

enum class Variant { electron, ion };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct DispersionSymbol {
    Variant variant = Variant::electron;
    double epsilon = 1.0;
};

// Undamped frequency: <r> for electrons, p(r) = r sqrt((2+r^2)/(1+r^2)) for ions.
double omega(double r, Variant v);
// omega^2 - eps^2 r^4. Positive: oscillatory. Negative: overdamped.
double radicand(double r, const DispersionSymbol& s);

double b_value(double r, const DispersionSymbol& s);        // throws if radicand < 0
double tilde_b_value(double r, const DispersionSymbol& s);  // throws if radicand > 0
inline double b_value(const Vec3& xi, const DispersionSymbol& s) { return b_value(norm3(xi), s); }

// Radial derivatives of b (oscillatory regime).
double b_prime(double r, const DispersionSymbol& s);
double b_second(double r, const DispersionSymbol& s);
double b_third(double r, const DispersionSymbol& s);

struct EigenPair {
    cplx plus, minus;
    bool overdamped = false;
};
EigenPair eigenvalues(double r, const DispersionSymbol& s);

// 2x2 block A(r) with dV/dt + A V = 0, row major.
std::array<double, 4> a_matrix(double r, const DispersionSymbol& s);

// Crossing switch: Taylor forms are used when |radicand| t^2 is below this.
inline constexpr double kCrossingZ = 1e-3;

// e^{-tA} = [[G1, -G2], [G2, G3]], row major.
std::array<double, 4> green_matrix(double t, double r, const DispersionSymbol& s);

// V = (h, c) stacked as a 2-component field.
SpectralField apply_semigroup(double t, const SpectralField& V, const DispersionSymbol& s);

// Low-frequency diagonalizer. R = Q^{-1} V, and dR_1/dt = lambda_- R_1,
// dR_2/dt = lambda_+ R_2 along the linear flow.
Mat2 q_matrix(double r, const DispersionSymbol& s);
Mat2 q_inverse_matrix(double r, const DispersionSymbol& s);
SpectralField q_transform(const SpectralField& V, const DispersionSymbol& s, const CutoffParams& p);
SpectralField q_inverse(const SpectralField& R, const DispersionSymbol& s, const CutoffParams& p);
// Exact diagonal flow in R variables.
SpectralField diagonal_flow(double t, const SpectralField& R, const DispersionSymbol& s);

struct DampingReport {
    double sup_weighted = 0;   // sup |(1-chi) G_j| e^{c0 t}
    double c0 = 0;
    double worst_eps = 0, worst_t = 0, worst_r = 0;
    double measured_rate = 0;  // slowest decay rate seen on the high region
    double sup_green = 0;      // sup |G_j| over the whole sweep
    std::vector<double> per_eps_sup;
    bool pass = false;
    double bound = 3.0;
};

DampingReport verify_high_freq_damping(const std::vector<double>& eps_grid,
                                       const std::vector<double>& t_grid,
                                       const std::vector<double>& r_grid, double kappa0,
                                       Variant v = Variant::electron, double bound = 3.0);

// sup_r e^{-eps t r^2} (eps r^2)^k chi(r) (1+t)^k over an r grid.
double heat_smoothing_sup(double eps, double kappa0, double t, int k, const std::vector<double>& r_grid);

}  // namespace nsplab
