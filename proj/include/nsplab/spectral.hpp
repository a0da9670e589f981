#pragma once

#include <functional>
#include <utility>

#include "nsplab/cutoff.hpp"
#include "nsplab/grid.hpp"

namespace nsplab {

using Mat2 = std::array<cplx, 4>;  // row major [[0,1],[2,3]]
using ScalarSymbol = std::function<cplx(const Vec3&)>;
using MatrixSymbol = std::function<Mat2(const Vec3&)>;

// Scalar symbols act on every component; matrix symbols need ncomp == 2.
SpectralField apply_multiplier(const ScalarSymbol& m, const SpectralField& f);
SpectralField apply_multiplier(const MatrixSymbol& m, const SpectralField& f);

// Radial shortcut, m(|xi|).
SpectralField apply_radial(const std::function<double(double)>& m, const SpectralField& f);

std::pair<SpectralField, SpectralField> low_high_split(const SpectralField& f,
                                                       const CutoffParams& p);
SpectralField littlewood_paley_block(const SpectralField& f, int j);
int lp_max_block(const Grid& g);  // blocks above this one vanish on the lattice

enum class NormKind { Lp, Hs, Wsp, HdotNeg, Hdot, Besov };

struct NormSpec {
    NormKind kind = NormKind::Lp;
    double p = 2;  // Lp, Wsp, Besov
    double s = 0;  // Hs, Wsp, HdotNeg (s > 0 means |xi|^{-s}), Hdot, Besov
    double r = 2;  // Besov summability; infinity allowed
};

double norm(const SpectralField& f, const NormSpec& spec);

double lp_norm(const SpectralField& f, double p);
double hs_norm(const SpectralField& f, double s);
double hdot_norm(const SpectralField& f, double s);      // |xi|^s weight, mode 0 skipped for s > 0
double hdot_neg_norm(const SpectralField& f, double s);  // |xi|^{-s}, needs zero mean
double wsp_norm(const SpectralField& f, double s, double p);
double besov_norm(const SpectralField& f, double s, double p, double r);

// Real L2 inner product <f, g> = V sum c_f conj(c_g), summed over components.
double inner(const SpectralField& f, const SpectralField& g);

double mean_coefficient(const SpectralField& f);  // max over components of |c_0|
void require_mean_zero(const SpectralField& f, const char* what, double tol = 1e-12);

std::pair<SpectralField, SpectralField> leray_project(const SpectralField& u);

SpectralField riesz(const SpectralField& f);
SpectralField riesz_adjoint(const SpectralField& v);

SpectralField gradient(const SpectralField& f);
SpectralField divergence(const SpectralField& u);
SpectralField laplacian(const SpectralField& f);
SpectralField curl(const SpectralField& u);  // 2D: scalar, 3D: vector, 1D: zero scalar
SpectralField partial(const SpectralField& f, int axis);

}  // namespace nsplab
