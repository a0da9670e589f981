#pragma once

#include <cmath>
#include <string>

#include "nsplab/grid.hpp"

namespace nsplab {

struct CutoffParams {
    double epsilon = 1.0;
    double kappa0 = 1.0 / 200.0;
};

void validate(const CutoffParams& p);

// C-infinity step: 1 for r <= a, 0 for r >= b, built from exp(-1/x).
double smooth_step(double r, double a, double b);

inline double chi_profile(double z) { return smooth_step(z, 1.0, 2.0); }
inline double chi_tilde_profile(double z) { return smooth_step(z, 3.0, 4.0); }

// chi_{eps,k0}(xi) = chi(sqrt(eps/k0) |xi|), same for the wider tilde cutoff.
double chi_low(double r, const CutoffParams& p);
double chi_tilde_low(double r, const CutoffParams& p);
double chi_high(double r, const CutoffParams& p);  // 1 - chi_low

// Littlewood-Paley: phi0 = chi, phi(xi) = phi0(xi) - phi0(2 xi), phi_j = phi(xi / 2^j).
double lp_symbol(int j, double r);

// FNV-1a over %.17g samples of both profiles. Goes into every report.
std::string profile_hash();

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double japan(double r) { return std::sqrt(1.0 + r * r); }  // <r>

}  // namespace nsplab
