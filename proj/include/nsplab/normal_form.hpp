#pragma once

#include <functional>
#include <vector>

#include "nsplab/phase.hpp"
#include "nsplab/spectral.hpp"

namespace nsplab {

// s(zeta, eta) for the output frequency zeta + eta.
using PairSymbol = std::function<cplx(const Vec3& zeta, const Vec3& eta)>;

struct BilinearOptions {
    double pair_budget = 6.0e7;  // refuse direct sums above this many candidate pairs
};

// T_s(f, g)^(xi_k) = sum_l s(xi_{k-l}, xi_l) fhat(k-l) ghat(l), with k-l taken
// without wraparound (pairs leaving the lattice are dropped), output dealiased.
// Only nonzero input coefficients enter, so the cost is nnz(f) * nnz(g).
// With s = 1 and dealiased inputs this is dealias(f g).
SpectralField bilinear_apply(const PairSymbol& s, const SpectralField& f, const SpectralField& g,
                             const BilinearOptions& opt = {});

// sum_{zeta, eta} s(zeta, eta) fhat(zeta) ghat(eta) conj(hhat(zeta+eta)) V.
cplx bilinear_triple_sum(const PairSymbol& s, const SpectralField& f, const SpectralField& g,
                         const SpectralField& h);

// A trajectory of the diagonal variables R = (r_1, r_2) at equispaced times
// 0 = s_0 < ... < s_M = t, with the sources B_j of
//   d/ds r_j = (-i sigma_j b(D) + eps Delta) r_j + B_j,  sigma_1 = +1, sigma_2 = -1.
struct NFTrajectory {
    std::vector<double> times;
    std::vector<SpectralField> R;  // 2 components each
    std::vector<SpectralField> B;  // 2 components each
};

// Integrates the symmetrized system from V0 with `intervals` equal steps up to t
// and stores R = Q^{-1} chi V and B = Q^{-1} chi B(V, V) at every node.
NFTrajectory vform_trajectory(const SpectralField& V0, double t, int intervals, const PhaseFamily& pf);

struct NFTerms {
    SpectralField lhs;                 // int_0^t e^{lam_-(t-s)} chi T_m(r_j, r_k) ds
    std::vector<SpectralField> I;      // I_1 .. I_7
    std::vector<SpectralField> I4x;    // I_41 .. I_47
};

struct NFResult {
    int j = 1, k = 1, nodes = 0;
    double lhs_norm = 0;
    double residual = 0;     // |lhs - sum I| / |lhs|, I_4 by direct quadrature
    double residual2 = 0;    // same with I_4 replaced by I_41 + ... + I_47
    double residual_I4 = 0;  // |I_4 - sum I_4x| / |lhs|
    std::vector<double> term_norms, term4_norms;
};

// Evaluates both sides of the integration-by-parts identity for phase phi_jk
// with the trapezoid rule on every stride-th node.
NFTerms normal_form_terms(const NFTrajectory& tr, const PhaseFamily& pf, int j, int k, int stride = 1);
NFResult normal_form_identity_check(const NFTrajectory& tr, const PhaseFamily& pf, int j, int k,
                                    int stride = 1);

struct NFConvergence {
    std::vector<NFResult> fine, coarse;  // per (j, k) at stride 1 and 2
    double max_residual_fine = 0, max_residual_coarse = 0;
    double order = 0;                    // log2 of the residual ratio, worst (j, k)
};

// Runs all four (j, k) at M and M/2 intervals.
NFConvergence normal_form_convergence(const NFTrajectory& tr, const PhaseFamily& pf);

}  // namespace nsplab
