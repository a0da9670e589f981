#include "nsplab/normal_form.hpp"
#include "nsplab/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsplab {

namespace {

struct Entry {
    std::array<int, 3> k;
    Vec3 xi;
    cplx c;
};

std::vector<Entry> nonzeros(const SpectralField& f) {
    std::vector<Entry> out;
    for (std::size_t i = 0; i < f.npoints(); ++i)
        if (f.coeffs[i] != cplx(0)) out.push_back({f.grid.kvec(i), f.grid.xi(i), f.coeffs[i]});
    return out;
}

void check_pair(const SpectralField& f, const SpectralField& g) {
    if (!(f.grid == g.grid)) throw std::invalid_argument("bilinear: fields live on different grids");
    if (f.ncomp != 1 || g.ncomp != 1) throw std::invalid_argument("bilinear: scalar fields only");
}

}  // namespace

SpectralField bilinear_apply(const PairSymbol& s, const SpectralField& f, const SpectralField& g,
                             const BilinearOptions& opt) {
    check_pair(f, g);
    const Grid& G = f.grid;
    auto nf = nonzeros(f), ng = nonzeros(g);
    double pairs = static_cast<double>(nf.size()) * static_cast<double>(ng.size());
    if (pairs > opt.pair_budget)
        throw std::length_error("bilinear: " + std::to_string(pairs) + " pairs exceed the budget of " +
                                std::to_string(opt.pair_budget));
    SpectralField out(G, 1);
    for (const auto& a : nf)
        for (const auto& b : ng) {
            std::array<int, 3> k{a.k[0] + b.k[0], a.k[1] + b.k[1], a.k[2] + b.k[2]};
            if (!G.resolved(k)) continue;
            std::size_t idx = G.index_of(k);
            if (!G.in_mask(idx)) continue;
            out.coeffs[idx] += s(a.xi, b.xi) * a.c * b.c;
        }
    return out;
}

cplx bilinear_triple_sum(const PairSymbol& s, const SpectralField& f, const SpectralField& g,
                         const SpectralField& h) {
    check_pair(f, g);
    check_pair(f, h);
    const Grid& G = f.grid;
    auto nf = nonzeros(f), ng = nonzeros(g);
    cplx acc = 0;
    for (const auto& a : nf)
        for (const auto& b : ng) {
            std::array<int, 3> k{a.k[0] + b.k[0], a.k[1] + b.k[1], a.k[2] + b.k[2]};
            if (!G.resolved(k)) continue;
            acc += s(a.xi, b.xi) * a.c * b.c * std::conj(h.coeffs[G.index_of(k)]);
        }
    return acc * G.volume();
}

namespace {

double l2(const SpectralField& f) { return std::sqrt(std::max(inner(f, f), 0.0)); }

// Per-mode multiplication by a complex radial weight.
SpectralField weigh(const SpectralField& f, const std::vector<cplx>& w) {
    SpectralField out = f;
    for (std::size_t i = 0; i < f.npoints(); ++i) out.coeffs[i] *= w[i];
    return out;
}

void add_scaled(SpectralField& acc, cplx a, const SpectralField& f) {
    for (std::size_t i = 0; i < acc.coeffs.size(); ++i) acc.coeffs[i] += a * f.coeffs[i];
}

}  // namespace

NFTrajectory vform_trajectory(const SpectralField& V0, double t, int intervals, const PhaseFamily& pf) {
    if (intervals < 2 || !(t > 0)) throw std::invalid_argument("vform trajectory: need t > 0 and at least 2 intervals");
    const DispersionSymbol sym = pf.symbol();
    const CutoffParams cp = pf.cutoff();
    auto low = [&](SpectralField f) {
        for (int a = 0; a < f.ncomp; ++a)
            for (std::size_t i = 0; i < f.npoints(); ++i) f.comp(a)[i] *= chi_low(norm3(f.grid.xi(i)), cp);
        return f;
    };
    NFTrajectory tr;
    SpectralField V = V0;
    const double dt = t / intervals;
    for (int m = 0; m <= intervals; ++m) {
        tr.times.push_back(t * m / intervals);
        tr.R.push_back(q_transform(low(V), sym, cp));
        tr.B.push_back(q_transform(low(bvv(V, sym.variant)), sym, cp));
        if (m < intervals) V = step_vform(V, dt, sym);
    }
    return tr;
}

NFTerms normal_form_terms(const NFTrajectory& tr, const PhaseFamily& pf, int j, int k, int stride) {
    if (pf.variant != Variant::electron) throw std::invalid_argument("normal form check: electron variant only");
    if (stride < 1) throw std::invalid_argument("normal form check: stride must be positive");
    const std::size_t nt = tr.times.size();
    if (tr.R.size() != nt || tr.B.size() != nt) throw std::invalid_argument("normal form check: ragged trajectory");
    if (nt < 3 || (nt - 1) % stride != 0 || (nt - 1) / stride < 2)
        throw std::invalid_argument("normal form check: need at least 2 trapezoid intervals after striding");
    const std::size_t M = (nt - 1) / stride;
    const double t = tr.times.back();
    const double ds = t / static_cast<double>(M);
    for (std::size_t i = 0; i < nt; ++i)
        if (std::abs(tr.times[i] - t * static_cast<double>(i) / static_cast<double>(nt - 1)) > 1e-12 * (1 + t))
            throw std::invalid_argument("normal form check: nodes must be equispaced");

    const Grid& G = tr.R.front().grid;
    const std::size_t N = G.size();
    const double eps = pf.epsilon;
    const DispersionSymbol sym = pf.symbol();
    const CutoffParams cp = pf.cutoff();

    // output weights: chi, eps |xi|^2, lambda_-
    std::vector<double> chi(N), er2(N);
    std::vector<cplx> lam(N);
    for (std::size_t i = 0; i < N; ++i) {
        double r = norm3(G.xi(i));
        chi[i] = chi_low(r, cp);
        er2[i] = eps * r * r;
        lam[i] = chi[i] > 0 ? cplx(-er2[i], -b_value(r, sym)) : cplx(0);
    }
    auto prop = [&](double tau) {
        std::vector<cplx> w(N);
        for (std::size_t i = 0; i < N; ++i) w[i] = chi[i] * std::exp(lam[i] * tau);
        return w;
    };
    auto edelta = [&](const SpectralField& f) {
        SpectralField out = f;
        for (std::size_t i = 0; i < N; ++i) out.coeffs[i] *= -er2[i];
        return out;
    };

    PairSymbol s0 = [&](const Vec3& z, const Vec3& e) { return nf_symbol(z, e, pf); };
    PairSymbol s1 = [&](const Vec3& z, const Vec3& e) { return nf_divided(j, k, 1, z, e, pf); };
    PairSymbol s2 = [&](const Vec3& z, const Vec3& e) { return nf_divided(j, k, 2, z, e, pf); };

    NFTerms out;
    out.lhs = SpectralField(G, 1);
    out.I.assign(7, SpectralField(G, 1));
    out.I4x.assign(7, SpectralField(G, 1));
    const cplx I(0, 1);

    for (std::size_t m = 0; m <= M; ++m) {
        const std::size_t n = m * stride;
        const double s = tr.times[n];
        const double wq = ds * ((m == 0 || m == M) ? 0.5 : 1.0);
        const auto E = prop(t - s);
        SpectralField rj = tr.R[n].component(j - 1), rk = tr.R[n].component(k - 1);
        SpectralField bj = tr.B[n].component(j - 1), bk = tr.B[n].component(k - 1);
        SpectralField qj = edelta(rj), qk = edelta(rk);

        SpectralField T1 = bilinear_apply(s1, rj, rk);
        SpectralField T1q = bilinear_apply(s1, qj, rk);
        SpectralField T2q = bilinear_apply(s2, qj, rk);

        add_scaled(out.lhs, wq, weigh(bilinear_apply(s0, rj, rk), E));
        add_scaled(out.I[2], -I * wq, weigh(edelta(T1), E) *= -1.0);  // eps|xi|^2 = -eps Delta
        add_scaled(out.I[3], -I * wq, weigh(T1q, E));
        add_scaled(out.I[4], -I * wq, weigh(bilinear_apply(s1, bj, rk), E));
        add_scaled(out.I[5], -I * wq, weigh(bilinear_apply(s1, rj, qk), E));
        add_scaled(out.I[6], -I * wq, weigh(bilinear_apply(s1, rj, bk), E));

        add_scaled(out.I4x[2], -wq, weigh(edelta(T2q), E) *= -1.0);
        add_scaled(out.I4x[3], -wq, weigh(bilinear_apply(s2, edelta(qj), rk), E));
        add_scaled(out.I4x[4], -wq, weigh(bilinear_apply(s2, edelta(bj), rk), E));
        add_scaled(out.I4x[5], -wq, weigh(bilinear_apply(s2, qj, qk), E));
        add_scaled(out.I4x[6], -wq, weigh(bilinear_apply(s2, qj, bk), E));

        if (m == M) {
            add_scaled(out.I[0], I, weigh(T1, prop(0)));
            add_scaled(out.I4x[0], 1.0, weigh(T2q, prop(0)));
        }
        if (m == 0) {
            add_scaled(out.I[1], -I, weigh(T1, E));
            add_scaled(out.I4x[1], -1.0, weigh(T2q, E));
        }
    }
    return out;
}

NFResult normal_form_identity_check(const NFTrajectory& tr, const PhaseFamily& pf, int j, int k, int stride) {
    NFTerms T = normal_form_terms(tr, pf, j, k, stride);
    NFResult res;
    res.j = j;
    res.k = k;
    res.nodes = static_cast<int>((tr.times.size() - 1) / stride);
    res.lhs_norm = l2(T.lhs);
    SpectralField sum1(T.lhs.grid, 1), sum4(T.lhs.grid, 1);
    for (const auto& x : T.I) {
        sum1 += x;
        res.term_norms.push_back(l2(x));
    }
    for (const auto& x : T.I4x) {
        sum4 += x;
        res.term4_norms.push_back(l2(x));
    }
    SpectralField sum2 = sum1 - T.I[3] + sum4;
    if (res.lhs_norm == 0) {
        // zero trajectory: both sides vanish identically
        res.residual = l2(T.lhs - sum1);
        res.residual2 = l2(T.lhs - sum2);
        res.residual_I4 = l2(T.I[3] - sum4);
        return res;
    }
    res.residual = l2(T.lhs - sum1) / res.lhs_norm;
    res.residual2 = l2(T.lhs - sum2) / res.lhs_norm;
    res.residual_I4 = l2(T.I[3] - sum4) / res.lhs_norm;
    return res;
}

NFConvergence normal_form_convergence(const NFTrajectory& tr, const PhaseFamily& pf) {
    NFConvergence c;
    for (int j = 1; j <= 2; ++j)
        for (int k = 1; k <= 2; ++k) {
            c.fine.push_back(normal_form_identity_check(tr, pf, j, k, 1));
            c.coarse.push_back(normal_form_identity_check(tr, pf, j, k, 2));
        }
    for (const auto& r : c.fine) c.max_residual_fine = std::max({c.max_residual_fine, r.residual, r.residual2});
    for (const auto& r : c.coarse)
        c.max_residual_coarse = std::max({c.max_residual_coarse, r.residual, r.residual2});
    c.order = (c.max_residual_fine > 0 && c.max_residual_coarse > 0)
                  ? std::log2(c.max_residual_coarse / c.max_residual_fine)
                  : 0.0;
    return c;
}

}  // namespace nsplab
