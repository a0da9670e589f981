#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nsplab/normal_form.hpp"
#include "nsplab/phase.hpp"
#include "nsplab/spectral.hpp"

using namespace nsplab;

namespace {

Vec3 v2(double a, double b) { return {a, b, 0.0}; }

double bfun(const Vec3& x, double eps) {
    double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return std::sqrt(1 + r2 - eps * eps * r2 * r2);
}

// dealiased random real field
SpectralField random_field(const Grid& g, unsigned seed, double width = 3.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField f = SpectralField::scalar(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r = norm3(g.xi(i));
        f.coeffs[i] = std::exp(-r * r / (2 * width * width)) * cplx(nd(rng), nd(rng));
    }
    enforce_hermitian(f);
    dealias(f);
    return f;
}

}  // namespace

TEST(Phase, Examples) {
    PhaseFamily pf;
    EXPECT_DOUBLE_EQ(phase_value(1, 1, v2(0, 0), v2(0, 0), pf), 1.0);
    Vec3 xi = v2(0.3, -0.4);
    Vec3 mxi = v2(-0.3, 0.4);
    EXPECT_NEAR(phase_value(1, 1, xi, mxi, pf), 2 * bfun(xi, pf.epsilon) - 1, 1e-15);
    EXPECT_GE(phase_value(1, 1, xi, mxi, pf), 1.0);
    // the other sign patterns
    Vec3 eta = v2(0.1, 0.7);
    Vec3 s = v2(0.4, 0.3);
    EXPECT_NEAR(phase_value(2, 1, xi, eta, pf), -bfun(xi, pf.epsilon) + bfun(eta, pf.epsilon) - bfun(s, pf.epsilon),
                1e-15);
    EXPECT_NEAR(phase_value(2, 2, xi, eta, pf), -bfun(xi, pf.epsilon) - bfun(eta, pf.epsilon) - bfun(s, pf.epsilon),
                1e-15);
    EXPECT_THROW(phase_value(3, 1, xi, eta, pf), std::invalid_argument);
}

TEST(Phase, LargeCollinearAsymptotics) {
    // eps -> 0, xi = eta, |xi| = r: phi11 -> 3/(4r) and the reciprocal ratio -> 4/3
    PhaseFamily pf;
    pf.epsilon = 1e-9;
    const double r = 50;
    double phi = phase_value(1, 1, v2(r, 0), v2(r, 0), pf);
    EXPECT_NEAR(phi * 4 * r / 3, 1.0, 1e-3);
    pf.epsilon = 1e-3;
    const double r2 = 10;
    double phi2 = phase_value(1, 1, v2(r2, 0), v2(r2, 0), pf);
    double mb = std::min(bfun(v2(r2, 0), 1e-3), bfun(v2(2 * r2, 0), 1e-3));
    EXPECT_NEAR((1 / phi2) / mb, 4.0 / 3.0, 0.05 * 4 / 3);
    // origin: ratio 1
    pf.epsilon = 1e-2;
    EXPECT_DOUBLE_EQ(1 / phase_value(1, 1, v2(0, 0), v2(0, 0), pf), 1.0);
}

TEST(Phase, QuantityA) {
    EXPECT_DOUBLE_EQ(quantity_A(v2(0, 0), v2(0, 0), 0.1), 3.0);
    PhaseFamily pf;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 200; ++i) {
        Vec3 xi = v2(u(rng), u(rng)), eta = v2(u(rng), u(rng));
        Vec3 s = v2(xi[0] + eta[0], xi[1] + eta[1]);
        double A = quantity_A(xi, eta, pf.epsilon);
        EXPECT_NEAR(A, quantity_A_expanded(xi, eta, pf.epsilon), 1e-12 * A);
        double sum = bfun(xi, pf.epsilon) + bfun(eta, pf.epsilon) + bfun(s, pf.epsilon);
        EXPECT_NEAR(A / phase_value(1, 1, xi, eta, pf), sum, 1e-12 * sum);
        EXPECT_GE(A, 1 - 32 * pf.kappa0 * pf.kappa0);
    }
}

TEST(PhaseScan, BoundsAndRefinement) {
    for (double eps : {1e-3, 1.0}) {
        PhaseFamily pf;
        pf.epsilon = eps;
        auto rep = reciprocal_phase_bound_scan(pf, 21, 3);
        ASSERT_EQ(rep.levels.size(), 3u);
        EXPECT_TRUE(rep.pass);
        EXPECT_NEAR(rep.a_bound, 1 - 32.0 / 40000, 1e-15);
        EXPECT_LT(rep.refinement_factor, 1.05);
        for (const auto& l : rep.levels) {
            EXPECT_GT(l.min_phi11, 0.0);
            EXPECT_GE(l.min_A, rep.a_bound);
            EXPECT_LT(l.identity_err, 1e-12);
            EXPECT_GE(l.cstar, 1.0);  // the origin alone gives 1
        }
    }
}

TEST(DerivativeScan, OriginValues) {
    PhaseFamily pf;
    EXPECT_NEAR(std::abs(nf_symbol(v2(0, 0), v2(0, 0), pf)), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(nf_divided(1, 1, 1, v2(0, 0), v2(0, 0), pf)), 0.5, 1e-15);
    EXPECT_NEAR(std::abs(nf_divided(1, 1, 2, v2(0, 0), v2(0, 0), pf)), 0.5, 1e-15);
    // off the triple support
    double far = 2 * tilde_support_radius(pf.cutoff());
    EXPECT_EQ(nf_divided(1, 1, 1, v2(far, 0), v2(0, 0), pf), cplx(0));
}

TEST(DerivativeScan, SmallScanIsStable) {
    PhaseFamily pf;
    pf.epsilon = 0.1;
    auto rep = symbol_derivative_scan(pf, 5, 2, 1);
    ASSERT_EQ(rep.levels.size(), 2u);
    EXPECT_TRUE(rep.pass) << rep.refinement_factor;
    EXPECT_TRUE(std::isfinite(rep.levels.back().ratio_phi));
    EXPECT_GE(rep.levels.back().ratio_phi, 0.5);
}

TEST(Bilinear, UnitSymbolIsProduct) {
    Grid g = make_grid(2, 16, 2 * kPi);
    SpectralField f = random_field(g, 1), h = random_field(g, 2);
    PairSymbol one = [](const Vec3&, const Vec3&) { return cplx(1); };
    SpectralField T = bilinear_apply(one, f, h);
    std::vector<double> pf = inverse_real(f), ph = inverse_real(h);
    for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= ph[i];
    SpectralField ref = forward_real(g, pf, 1);
    dealias(ref);
    SpectralField d = T - ref;
    EXPECT_LT(std::sqrt(inner(d, d) / inner(ref, ref)), 1e-13);
}

TEST(Bilinear, SeparableAndSymmetric) {
    Grid g = make_grid(2, 16, 2 * kPi);
    SpectralField f = random_field(g, 4), h = random_field(g, 5);
    PairSymbol sep = [](const Vec3& z, const Vec3& e) { return cplx(z[0] * z[0] + z[1] * z[1], 0) * (1.0 + e[1] * e[1]); };
    SpectralField T = bilinear_apply(sep, f, h);
    SpectralField a = -1.0 * laplacian(f);
    // 1 + xi_2^2 on the second factor is 1 - d_2^2
    SpectralField c = h - partial(partial(h, 1), 1);
    std::vector<double> pa = inverse_real(a), pc = inverse_real(c);
    for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= pc[i];
    SpectralField ref = forward_real(g, pa, 1);
    dealias(ref);
    SpectralField d = T - ref;
    EXPECT_LT(std::sqrt(inner(d, d) / inner(ref, ref)), 1e-12);

    PairSymbol sym = [](const Vec3& z, const Vec3& e) { return cplx(std::cos(z[0] * e[1] + e[0] * z[1]), z[0] + e[0]); };
    SpectralField t1 = bilinear_apply(sym, f, h), t2 = bilinear_apply(sym, h, f);
    SpectralField dd = t1 - t2;
    EXPECT_LT(std::sqrt(inner(dd, dd) / inner(t1, t1)), 1e-12);
}

TEST(Bilinear, TripleSumMatchesPairing) {
    Grid g = make_grid(2, 16, 2 * kPi);
    SpectralField f = random_field(g, 6), h = random_field(g, 7), w = random_field(g, 8);
    PairSymbol s = [](const Vec3& z, const Vec3& e) { return cplx(1 + z[0] * e[1], 0.5 * e[0]); };
    SpectralField T = bilinear_apply(s, f, h);
    cplx ref = 0;
    for (std::size_t i = 0; i < g.size(); ++i) ref += T.coeffs[i] * std::conj(w.coeffs[i]);
    ref *= g.volume();
    cplx v = bilinear_triple_sum(s, f, h, w);
    EXPECT_LT(std::abs(v - ref), 1e-12 * std::abs(ref));
}

TEST(Bilinear, Guards) {
    Grid g = make_grid(2, 16, 2 * kPi);
    SpectralField f = random_field(g, 9);
    PairSymbol one = [](const Vec3&, const Vec3&) { return cplx(1); };
    BilinearOptions o;
    o.pair_budget = 100;
    EXPECT_THROW(bilinear_apply(one, f, f, o), std::length_error);
    Grid g2 = make_grid(2, 8, 2 * kPi);
    EXPECT_THROW(bilinear_apply(one, f, random_field(g2, 1)), std::invalid_argument);
    EXPECT_THROW(bilinear_apply(one, f, SpectralField::vector(g)), std::invalid_argument);
}

namespace {

// exact linear trajectory with one mode pair, no sources
NFTrajectory single_mode(const PhaseFamily& pf, int M, double t) {
    Grid g = make_grid(2, 32, 8 * kPi);
    SpectralField R0(g, 2);
    std::size_t p = g.index_of({1, 0, 0}), m = g.index_of({-1, 0, 0});
    R0.comp(0)[p] = cplx(0.3, 0.1);
    R0.comp(0)[m] = cplx(0.2, -0.4);
    R0.comp(1)[p] = cplx(-0.1, 0.25);
    R0.comp(1)[m] = cplx(0.15, 0.05);
    NFTrajectory tr;
    for (int n = 0; n <= M; ++n) {
        double s = t * n / M;
        tr.times.push_back(s);
        SpectralField R(g, 2);
        for (std::size_t i : {p, m}) {
            double r = norm3(g.xi(i));
            double b = b_value(r, pf.symbol()), er2 = pf.epsilon * r * r;
            R.comp(0)[i] = std::exp(cplx(-er2, -b) * s) * R0.comp(0)[i];
            R.comp(1)[i] = std::exp(cplx(-er2, b) * s) * R0.comp(1)[i];
        }
        tr.R.push_back(R);
        tr.B.push_back(SpectralField(g, 2));
    }
    return tr;
}

}  // namespace

TEST(NormalForm, ZeroTrajectory) {
    PhaseFamily pf;
    Grid g = make_grid(2, 16, 8 * kPi);
    NFTrajectory tr;
    for (int n = 0; n <= 4; ++n) {
        tr.times.push_back(0.25 * n);
        tr.R.push_back(SpectralField(g, 2));
        tr.B.push_back(SpectralField(g, 2));
    }
    auto r = normal_form_identity_check(tr, pf, 1, 2);
    EXPECT_EQ(r.residual, 0.0);
    EXPECT_EQ(r.residual2, 0.0);
}

TEST(NormalForm, SingleModeSecondOrder) {
    PhaseFamily pf;
    NFTrajectory tr = single_mode(pf, 128, 2.0);
    auto c = normal_form_convergence(tr, pf);
    EXPECT_NEAR(c.order, 2.0, 0.2);
    EXPECT_LT(c.max_residual_fine, 1e-3);
    for (const auto& r : c.fine) EXPECT_GT(r.lhs_norm, 0.0);
}

TEST(NormalForm, RejectsBadNodes) {
    PhaseFamily pf;
    NFTrajectory tr = single_mode(pf, 4, 1.0);
    tr.times[2] += 0.01;
    EXPECT_THROW(normal_form_identity_check(tr, pf, 1, 1), std::invalid_argument);
    NFTrajectory tr2 = single_mode(pf, 3, 1.0);
    EXPECT_THROW(normal_form_identity_check(tr2, pf, 1, 1, 2), std::invalid_argument);
}
