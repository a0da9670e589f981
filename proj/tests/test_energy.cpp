#include <gtest/gtest.h>

#include <cmath>

#include "nsplab/energy.hpp"
#include "nsplab/spectral.hpp"

using namespace nsplab;

namespace {

FluidState small_state(int n, double eps, double amp, bool rotational, std::uint64_t seed = 3) {
    Grid g = make_grid(2, n, 2 * kPi);
    InitialDataSpec sp;
    sp.delta0 = amp;
    sp.width = 1.5;
    sp.seed = seed;
    sp.rotational = rotational;
    sp.parity = true;
    return make_initial_data(g, Variant::electron, eps, sp);
}

}  // namespace

TEST(Multi, IndexCounts) {
    EXPECT_EQ(multi_indices(1, 4).size(), 1u);
    EXPECT_EQ(multi_indices(2, 3).size(), 4u);
    EXPECT_EQ(multi_indices(3, 2).size(), 6u);
    EXPECT_EQ(multi_indices(3, 0).size(), 1u);
    for (const auto& a : multi_indices(3, 3)) EXPECT_EQ(a[0] + a[1] + a[2], 3);
}

TEST(Multi, SobolevSumMatchesPartials) {
    FluidState s = small_state(16, 0.1, 0.1, false);
    SpectralField f = s.rho;
    SpectralField d1 = partial(f, 0), d2 = partial(f, 1);
    double ref = inner(f, f) + inner(d1, d1) + inner(d2, d2);
    EXPECT_NEAR(sobolev_sq(f, 1), ref, 1e-13 * ref);
    SpectralField d12 = partial(d1, 1), d11 = partial(d1, 0), d22 = partial(d2, 1);
    double ref2 = inner(d11, d11) + inner(d12, d12) + inner(d22, d22);
    EXPECT_NEAR(seminorm_sq(f, 2), ref2, 1e-13 * ref2);
}

TEST(Energy, ZeroAndSingleMode) {
    Grid g = make_grid(2, 16, 2 * kPi);
    FluidState z(g, Variant::electron, 0.1);
    EXPECT_EQ(energy_EN(z, 3), 0.0);
    // u = a cos(x_1) e_1: E_0 = (1/2) int a^2 cos^2 = V a^2 / 4
    const double a = 0.3;
    z.u.comp(0)[g.index_of({1, 0, 0})] = a / 2;
    z.u.comp(0)[g.index_of({-1, 0, 0})] = a / 2;
    EXPECT_NEAR(energy_EN(z, 0), g.volume() * a * a / 4, 1e-15);
    // N = 1 adds |d_1 u|^2 with the same weight
    EXPECT_NEAR(energy_EN(z, 1), 2 * g.volume() * a * a / 4, 1e-14);
}

TEST(Energy, DensityWeightSandwich) {
    // |rho|_inf <= 1/6 puts E_N / (|U|^2 / 2) in [5/6, 7/6]
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        FluidState s = small_state(16, 0.2, 1.0, true, seed);
        double m = lp_norm(s.rho, INFINITY);
        s.rho *= (1.0 / 6) / m;
        double ratio = energy_EN(s, 3) / (0.5 * state_sobolev_sq(s, 3));
        EXPECT_GE(ratio, 5.0 / 6);
        EXPECT_LE(ratio, 7.0 / 6);
        EXPECT_NE(ratio, 1.0);
    }
}

TEST(Energy, TimeDerivativeIsFourthOrderExact) {
    std::vector<double> t, y;
    for (int i = 0; i <= 10; ++i) {
        double x = 0.1 * i;
        t.push_back(x);
        y.push_back(x * x * x * x - 2 * x * x * x + x);
    }
    auto d = time_derivative(t, y);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double x = t[i];
        EXPECT_NEAR(d[i], 4 * x * x * x - 6 * x * x + 1, 1e-12);
    }
    EXPECT_THROW(time_derivative({0, 1, 2, 3}, {0, 1, 2, 3}), std::invalid_argument);
    EXPECT_THROW(time_derivative({0, 1, 2, 3, 5}, {0, 1, 2, 3, 4}), std::invalid_argument);
}

TEST(Energy, LinearFlowDissipationLaw) {
    // unweighted E_N decreases at exactly the per-mode dissipation rate
    FluidState s = small_state(16, 0.2, 0.1, true);
    StepOptions o;
    o.rhs.nonlinear = false;
    std::vector<double> t, E;
    std::vector<FluidState> st;
    const double h = 1e-3;
    for (int k = 0; k <= 8; ++k) {
        t.push_back(k * h);
        E.push_back(energy_EN(s, 3, false));
        st.push_back(s);
        s = step_main(s, h, o);
    }
    auto d = time_derivative(t, E);
    for (int k = 2; k <= 6; ++k) {
        double D = linear_dissipation(st[k], 3);
        EXPECT_NEAR(d[k], -D, 1e-8 * D);
    }
}

TEST(Energy, ResidualOnLinearAndZeroTrajectories) {
    FluidState s = small_state(16, 0.2, 0.1, true);
    StepOptions o;
    o.rhs.nonlinear = false;
    std::vector<double> t;
    std::vector<FluidState> st;
    for (int k = 0; k <= 40; ++k) {
        t.push_back(k * 0.01);
        st.push_back(s);
        s = step_main(s, 0.01, o);
    }
    auto L = energy_inequality_residual(t, st, 3, false);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(L.dEdt[i] + L.dissipation[i], 1e-6 * L.dissipation[i]);
    EXPECT_LE(L.sup_residual, 0.0);

    std::vector<FluidState> zero(6, FluidState(s.grid, Variant::electron, 0.2));
    auto Z = energy_inequality_residual({0, 1, 2, 3, 4, 5}, zero, 3);
    EXPECT_EQ(Z.sup_residual, 0.0);
}

TEST(Energy, CoarseSamplingIsRejected) {
    FluidState s = small_state(16, 1.0, 0.1, true);
    std::vector<double> t;
    std::vector<FluidState> st;
    for (int k = 0; k <= 6; ++k) {
        t.push_back(k * 0.5);
        st.push_back(s);
        for (int j = 0; j < 10; ++j) s = step_main(s, 0.05);
    }
    EXPECT_THROW(energy_inequality_residual(t, st, 3), std::invalid_argument);
}

TEST(Energy, NonlinearResidualIsRefinementStable) {
    auto run = [](double dt) {
        FluidState s = small_state(16, 0.2, 0.05, false);
        std::vector<double> t;
        std::vector<FluidState> st;
        int n = static_cast<int>(std::llround(2.0 / dt));
        for (int k = 0; k <= n; ++k) {
            t.push_back(k * dt);
            st.push_back(s);
            if (k < n) s = step_main(s, dt);
        }
        return energy_inequality_residual(t, st, 3).sup_residual;
    };
    double a = run(0.02), b = run(0.01);
    EXPECT_TRUE(std::isfinite(a));
    EXPECT_GE(b / a, 0.9);
    EXPECT_LE(b / a, 1.1);
}

TEST(Perturb, ZeroPerturbation) {
    FluidState s = small_state(16, 0.2, 0.05, false);
    std::vector<double> t;
    std::vector<SplitPair> ps;
    for (int k = 0; k <= 5; ++k) {
        t.push_back(k * 0.1);
        SplitPair p{s, FluidState(s.grid, s.variant, s.epsilon)};
        ps.push_back(p);
    }
    auto R = perturb_energy_report(t, ps, 0.05);
    EXPECT_TRUE(R.all_zero);
    for (const auto& pt : R.points) {
        EXPECT_EQ(pt.EM, 0.0);
        EXPECT_EQ(pt.X, 0.0);
    }
    EXPECT_EQ(R.sup_ratio, 0.0);
}

TEST(Perturb, SmallRun) {
    const double eps = 0.2, delta0 = 0.01;
    FluidState s = small_state(16, eps, delta0, true);
    SplitPair p = make_split(s);
    std::vector<double> t;
    std::vector<SplitPair> ps;
    std::vector<FluidState> pert;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(k * 0.01);
        ps.push_back(p);
        pert.push_back(p.perturb);
        p = step_split(p, 0.01);
    }
    auto R = perturb_energy_report(t, ps, delta0);
    EXPECT_FALSE(R.all_zero);
    EXPECT_TRUE(R.sandwich_ok);
    EXPECT_TRUE(R.cauchy_schwarz_ok);
    for (const auto& pt : R.points) {
        EXPECT_TRUE(pt.sandwich_precondition);
        EXPECT_LE(std::abs(pt.X), pt.n_HM * pt.v_HM);
    }
    EXPECT_LE(R.sup_ratio, 8.0);
    EXPECT_TRUE(std::isfinite(R.C_fit1) && std::isfinite(R.C_fit2) && std::isfinite(R.C_fit20));
    EXPECT_GT(R.gronwall_constant, 0.0);

    auto N = neg_sobolev_track(t, pert, 0.4);
    EXPECT_TRUE(N.pass);
    EXPECT_LE(N.max_interp_violation, 1e-10);
    EXPECT_LE(N.sup, 2 * N.E0 + N.C_recorded);
}

TEST(NegSobolev, SingleModeValues) {
    Grid g = make_grid(2, 16, 2 * kPi);
    SpectralField f = SpectralField::scalar(g);
    const cplx a(0.3, -0.2);
    f.coeffs[g.index_of({2, 0, 0})] = a;
    EXPECT_NEAR(hdot_neg_norm(f, 0.25), std::pow(2.0, -0.25) * std::abs(a) * std::sqrt(g.volume()), 1e-15);
    // one frequency: the interpolation inequality is an equality
    double l2 = std::sqrt(inner(f, f));
    double rhs = std::pow(hdot_neg_norm(f, 0.4), 1 / 1.4) * std::pow(hdot_norm(f, 1.0), 0.4 / 1.4);
    EXPECT_NEAR(l2, rhs, 1e-14 * l2);
    EXPECT_LT(interpolation_violation(f, 0.4), 1e-14);
}

TEST(NegSobolev, Preconditions) {
    FluidState s = small_state(16, 0.2, 0.05, true);
    EXPECT_THROW(neg_sobolev_track({0}, {s}, 0.5), std::invalid_argument);
    EXPECT_THROW(neg_sobolev_track({0}, {s}, 0.0), std::invalid_argument);
    s.u.comp(0)[0] = 0.1;
    EXPECT_THROW(neg_sobolev_track({0}, {s}, 0.4), std::domain_error);
}

TEST(Decay, ReportAndRates) {
    std::vector<double> t, v, w;
    for (int i = 0; i < 12; ++i) {
        double x = 10 * std::pow(20.0, i / 11.0);
        t.push_back(x);
        v.push_back(2 * std::pow(x, -1.125));
        w.push_back(3 * std::exp(-0.02 * x));
    }
    auto e = decay_report("main W^{s,8}", t, v, 1.125, 10, 200);
    EXPECT_NEAR(e.fit.exponent, 1.125, 1e-12);
    EXPECT_NEAR(e.delta, 0.0, 1e-12);
    EXPECT_EQ(e.label, "qualitative (finite box)");
    EXPECT_NEAR(fit_exponential_rate(t, w), 0.02, 1e-12);
    EXPECT_THROW(decay_report("x", t, v, 1, 10, 12), std::invalid_argument);
}

TEST(Decay, HighFrequencyDampingRate) {
    // the high part of the linear flow decays at least at rate kappa0 / 4
    const double eps = 0.1, k0 = 1.0 / 200;
    FluidState s = small_state(32, eps, 0.1, false);
    SpectralField V0 = symmetrize(s);
    std::vector<double> t, v;
    for (int i = 0; i <= 20; ++i) {
        double x = 2.0 * i;
        SpectralField hi = low_high_split(apply_semigroup(x, V0, {Variant::electron, eps}), {eps, k0}).second;
        t.push_back(x);
        v.push_back(hs_norm(hi, 2));
    }
    EXPECT_GE(fit_exponential_rate(t, v), k0 / 4);
}

TEST(EpsDeltaR, ZeroAndLinearFlow) {
    PhaseFamily pf;
    pf.epsilon = 0.1;
    Grid g = make_grid(2, 64, 200.0);
    std::vector<double> t{0, 1, 2};
    std::vector<SpectralField> zero(3, SpectralField(g, 2));
    auto Z = eps_delta_r_decay_check(t, zero, pf);
    EXPECT_EQ(Z.sup1, 0.0);
    EXPECT_EQ(Z.sup2, 0.0);

    InitialDataSpec sp;
    sp.width = 0.5;
    sp.rotational = false;
    FluidState s = make_initial_data(g, Variant::electron, pf.epsilon, sp);
    SpectralField V0 = symmetrize(s);
    std::vector<double> ts;
    std::vector<SpectralField> Vs;
    for (int i = 0; i <= 50; ++i) {
        ts.push_back(2.0 * i);
        Vs.push_back(apply_semigroup(2.0 * i, V0, pf.symbol()));
    }
    auto R = eps_delta_r_decay_check(ts, Vs, pf);
    EXPECT_TRUE(R.finite);
    EXPECT_GT(R.sup1, 0.0);
    // per mode (1+t) eps r^2 e^{-eps r^2 t} <= 2/e once t >= 1, so the normalized sup stays O(1)
    EXPECT_LT(R.sup1_normalized, 1.0) << R.sup1_normalized;
}
