#include "nsplab/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>

#include "nsplab/checkpoint.hpp"
#include "nsplab/cutoff.hpp"
#include "nsplab/dispersive.hpp"
#include "nsplab/energy.hpp"
#include "nsplab/phase.hpp"
#include "nsplab/solver.hpp"

namespace nsplab {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Constant names carry the epsilon only when a run covers several.
std::string key(const std::string& name, const ExperimentConfig& c, std::size_t i) {
    if (c.epsilons.size() == 1) return name;
    return name + "[eps=" + short_g(c.epsilons[i]) + "]";
}

void add(CampaignResult& r, std::string name, bool pass, double value, double threshold, std::string detail = {}) {
    r.criteria.push_back({std::move(name), pass, value, threshold, std::move(detail)});
}

template <class F>
auto with_context(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(what + ": " + e.what());
    }
}

// ---- semigroup-verify ------------------------------------------------------

using M2 = std::array<long double, 4>;

M2 mul(const M2& a, const M2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

// e^{-tA} by scaling and squaring a Taylor series in long double. Kept apart
// from the closed forms on purpose: it shares no code with green_matrix.
M2 expm_reference(long double t, long double r, long double eps, Variant v) {
    long double w = v == Variant::ion ? r * std::sqrt((2 + r * r) / (1 + r * r)) : std::sqrt(1 + r * r);
    M2 m{0, -t * w, t * w, -2 * t * eps * r * r};
    long double nrm = 0;
    for (auto x : m) nrm = std::max(nrm, std::fabs(x));
    int sq = 0;
    while (nrm > 0.125L) {
        nrm /= 2;
        ++sq;
    }
    for (auto& x : m) x = std::ldexp(x, -sq);
    M2 term{1, 0, 0, 1}, acc{1, 0, 0, 1};
    for (int k = 1; k <= 30; ++k) {
        term = mul(term, m);
        for (auto& x : term) x /= k;
        for (int i = 0; i < 4; ++i) acc[i] += term[i];
    }
    for (int i = 0; i < sq; ++i) acc = mul(acc, acc);
    return acc;
}

// radius where omega(r) = eps r^2, by bisection on the radicand
double crossing_radius(const DispersionSymbol& s) {
    double lo = 0, hi = 1;
    while (radicand(hi, s) > 0) hi *= 2;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (radicand(mid, s) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void semigroup_verify(const ExperimentConfig& c, CampaignResult& out) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(0, 1);
    const double lo = *std::min_element(c.epsilons.begin(), c.epsilons.end());
    const double hi = *std::max_element(c.epsilons.begin(), c.epsilons.end());
    CsvTable tab{{"eps", "r", "t", "radicand", "rel_err", "det_err"}, {}};
    double worst = 0, worst_det = 0;
    int near_crossing = 0;
    for (int k = 0; k < c.samples; ++k) {
        double eps = lo * std::pow(hi / lo, U(rng));
        DispersionSymbol sym{c.variant, eps};
        double r = std::pow(10.0, 3 * U(rng) - 1.5);
        if (k % 4 == 0) {
            double rc = crossing_radius(sym);
            r = rc + (U(rng) - 0.5) * 2e-7 / rc;  // |radicand| ~ 2 rc |dr| < 1e-6 (electron)
        }
        double t = 30 * U(rng);
        // keep e^{-eps r^2 t} inside the normal double range
        t = std::min(t, 200.0 / (eps * r * r) * U(rng));
        auto G = green_matrix(t, r, sym);
        auto ref = expm_reference(t, r, eps, c.variant);
        double scale = 0, err = 0;
        for (int i = 0; i < 4; ++i) {
            scale = std::max(scale, static_cast<double>(std::fabs(ref[i])));
            err = std::max(err, std::abs(G[i] - static_cast<double>(ref[i])));
        }
        double rel = err / scale;
        double det_err = std::abs(G[0] * G[3] - G[1] * G[2] - std::exp(-2 * eps * r * r * t));
        double rad = radicand(r, sym);
        if (std::abs(rad) < 1e-6) ++near_crossing;
        worst = std::max(worst, rel);
        worst_det = std::max(worst_det, det_err);
        tab.rows.push_back({eps, r, t, rad, rel, det_err});
    }
    out.tables["green_samples.csv"] = std::move(tab);

    std::vector<double> ts, rs;
    for (int i = 0; i <= 200; ++i) ts.push_back(i);
    for (int i = 0; i <= 800; ++i) rs.push_back(std::pow(10.0, -2 + 5.0 * i / 800));
    auto damp = verify_high_freq_damping(c.epsilons, ts, rs, c.kappa0, c.variant, c.tol("damping_bound"));
    CsvTable dtab{{"eps", "sup_weighted"}, {}};
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) dtab.rows.push_back({c.epsilons[i], damp.per_eps_sup[i]});
    out.tables["damping.csv"] = std::move(dtab);

    add(out, "green matrix vs matrix exponential", worst <= c.tol("green_rel"), worst, c.tol("green_rel"),
        std::to_string(c.samples) + " samples, " + std::to_string(near_crossing) + " with |radicand| < 1e-6");
    add(out, "determinant identity", worst_det <= c.tol("determinant"), worst_det, c.tol("determinant"));
    add(out, "high-frequency damping", damp.pass && damp.sup_weighted <= c.tol("damping_bound"), damp.sup_weighted,
        c.tol("damping_bound"), "c0 = " + short_g(damp.c0));
    if (near_crossing == 0) out.warnings.push_back("no sample landed within 1e-6 of the crossing");

    out.summary["samples"] = c.samples;
    out.summary["near_crossing"] = near_crossing;
    out.summary["max_rel_err"] = worst;
    out.summary["max_det_err"] = worst_det;
    out.summary["damping"] = {{"sup_weighted", damp.sup_weighted}, {"c0", damp.c0},
                              {"measured_rate", damp.measured_rate}, {"worst_eps", damp.worst_eps},
                              {"worst_t", damp.worst_t}, {"worst_r", damp.worst_r}, {"per_eps", damp.per_eps_sup}};
    out.constants["green_max_rel"] = worst;
    out.constants["damping_sup"] = damp.sup_weighted;
    out.constants["damping_rate"] = damp.measured_rate;
}

// ---- dispersive-scan and ion-suite -------------------------------------------

SupScanOptions scan_options(const ExperimentConfig& c) {
    SupScanOptions o;
    o.x_samples = c.x_samples;
    o.fit_t_min = c.t_min;
    o.fit_t_max = c.t_max;
    return o;
}

void record_decay(const ExperimentConfig& c, CampaignResult& out, std::size_t i, const DecayFit& fit,
                  double predicted, int d, const char* stem) {
    std::string file = std::string(stem) + "_" + std::to_string(i) + ".csv";
    out.tables[file] = decay_table(fit, c.epsilons[i], c.kappa0, d);
    out.series.push_back({std::string(stem) + "_eps_" + short_g(c.epsilons[i]), file, "t", {"value"}, predicted,
                          c.t_min});
}

void dispersive_scan(const ExperimentConfig& c, CampaignResult& out) {
    const int d = c.dim;
    const double predicted = d / 2.0;
    auto profile = gaussian_profile(d, c.width);
    auto times = geometric_times(c.t_min, c.t_max, c.t_count);
    json fits = json::array();
    std::vector<double> exps;
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        double eps = c.epsilons[i];
        auto fit = with_context("dispersive-scan eps=" + short_g(eps), [&] {
            return sup_norm_scan(profile, {Variant::electron, eps}, c.kappa0, times, scan_options(c));
        });
        exps.push_back(fit.exponent);
        record_decay(c, out, i, fit, predicted, d, "decay");
        json j = to_json(fit);
        j["epsilon"] = eps;
        j["predicted"] = predicted;
        fits.push_back(j);
        double w = c.tol("exponent_window");
        add(out, "decay exponent eps=" + short_g(eps), std::abs(fit.exponent - predicted) <= w, fit.exponent, w,
            "predicted " + short_g(predicted));
        out.constants[key("exponent", c, i)] = fit.exponent;
    }
    if (exps.size() > 1) {
        double spread = *std::max_element(exps.begin(), exps.end()) - *std::min_element(exps.begin(), exps.end());
        add(out, "exponent uniform in eps", spread < c.tol("exponent_spread"), spread, c.tol("exponent_spread"));
        out.summary["exponent_spread"] = spread;
    }
    auto hess = hessian_det_scan(c.epsilons, c.kappa0, d);
    add(out, "Hessian determinant lower bound", hess.pass, hess.global_min, hess.bound);
    out.summary["dim"] = d;
    out.summary["fits"] = fits;
    out.summary["hessian"] = {{"min_det", hess.min_det}, {"global_min", hess.global_min}, {"bound", hess.bound}};
    out.constants["hessian_min"] = hess.global_min;
}

void ion_suite(const ExperimentConfig& c, CampaignResult& out) {
    auto rep = ion_b_properties(c.epsilons, c.kappa0);
    CsvTable tab{{"eps", "min_bprime", "zero_count", "r0", "b3_at_r0", "iota", "c2"}, {}};
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        tab.rows.push_back({rep.eps[i], rep.min_bprime[i], static_cast<double>(rep.zero_count[i]), rep.r0[i],
                            rep.b3_at_r0[i], rep.iota[i], rep.c2[i]});
    out.tables["ion_b.csv"] = std::move(tab);
    for (const auto& f : rep.flags) out.warnings.push_back(f);

    const double bp_bound = 1 / (2 * std::sqrt(2.0)) - c.tol("ion_bprime_slack");
    add(out, "min b' over the low-frequency region", rep.min_bprime_all >= bp_bound, rep.min_bprime_all, bp_bound);
    out.constants["min_bprime"] = rep.min_bprime_all;

    const double predicted = 4.0 / 3.0;
    auto profile = gaussian_profile(3, c.width);
    auto times = geometric_times(c.t_min, c.t_max, c.t_count);
    json per = json::array();
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        double eps = c.epsilons[i];
        add(out, "single zero of b'' in [1,10] eps=" + short_g(eps), rep.zero_count[i] == 1, rep.zero_count[i], 1);
        bool b3ok = rep.zero_count[i] == 1 && rep.b3_at_r0[i] > 0 && rep.iota[i] > 0;
        add(out, "b''' > 0 near r0 eps=" + short_g(eps), b3ok, b3ok ? rep.iota[i] : 0.0, 0.0,
            "iota is the half-width of the interval");
        auto fit = with_context("ion-suite eps=" + short_g(eps),
                                [&] { return ion_decay_scan(profile, eps, c.kappa0, times, scan_options(c)); });
        record_decay(c, out, i, fit, predicted, 3, "ion_decay");
        double w = c.tol("ion_exponent");
        add(out, "ion decay exponent eps=" + short_g(eps), std::abs(fit.exponent - predicted) <= w, fit.exponent, w,
            "predicted 4/3");
        json j = to_json(fit);
        j["epsilon"] = eps;
        j["zero_count"] = rep.zero_count[i];
        j["min_bprime"] = rep.min_bprime[i];
        if (rep.zero_count[i] == 1) {
            j["r0"] = rep.r0[i];
            j["b3_at_r0"] = rep.b3_at_r0[i];
            j["iota"] = rep.iota[i];
        }
        per.push_back(j);
        out.constants[key("ion_exponent", c, i)] = fit.exponent;
    }
    out.summary["r0_limit"] = ion_r0_limit();
    out.summary["per_eps"] = per;
}

// ---- phase-scan ---------------------------------------------------------------

void phase_scan(const ExperimentConfig& c, CampaignResult& out) {
    CsvTable tab{{"eps", "n", "points", "min_phi11", "min_A", "cstar", "identity_err", "expansion_err"}, {}};
    CsvTable dtab{{"eps", "n", "ratio_phi", "ratio_phi2", "richardson_gap"}, {}};
    json per = json::array();
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        double eps = c.epsilons[i];
        PhaseFamily pf{Variant::electron, eps, c.kappa0};
        auto rep = with_context("phase-scan eps=" + short_g(eps),
                                [&] { return reciprocal_phase_bound_scan(pf, c.n0, c.levels); });
        double min_phi = INFINITY, min_A = INFINITY;
        for (const auto& l : rep.levels) {
            tab.rows.push_back({eps, double(l.n), double(l.points), l.min_phi11, l.min_A, l.cstar, l.identity_err,
                                l.expansion_err});
            min_phi = std::min(min_phi, l.min_phi11);
            min_A = std::min(min_A, l.min_A);
        }
        std::string e = " eps=" + short_g(eps);
        add(out, "phi11 > 0" + e, min_phi > 0, min_phi, 0);
        add(out, "A >= 1 - 32 kappa0^2" + e, min_A >= rep.a_bound, min_A, rep.a_bound);
        add(out, "reciprocal-phase ratio stable" + e, rep.refinement_factor < c.tol("phase_refine"),
            rep.refinement_factor, c.tol("phase_refine"),
            std::to_string(rep.levels.back().points) + " points on the finest level");
        json j{{"epsilon", eps},
               {"a_bound", rep.a_bound},
               {"min_phi11", min_phi},
               {"min_A", min_A},
               {"cstar", rep.levels.back().cstar},
               {"refinement_factor", rep.refinement_factor}};
        out.constants[key("cstar", c, i)] = rep.levels.back().cstar;
        out.constants[key("min_A", c, i)] = min_A;

        if (c.deriv_n0 > 0) {
            auto drep = with_context("derivative scan eps=" + short_g(eps),
                                     [&] { return symbol_derivative_scan(pf, c.deriv_n0, c.deriv_levels); });
            for (const auto& l : drep.levels)
                dtab.rows.push_back({eps, double(l.n), l.ratio_phi, l.ratio_phi2, l.max_richardson_gap});
            for (const auto& f : drep.flags) out.warnings.push_back("eps=" + short_g(eps) + ": " + f);
            add(out, "symbol derivatives bounded and stable" + e, drep.pass, drep.refinement_factor, 1.10);
            j["derivative"] = {{"ratio_phi", drep.levels.back().ratio_phi},
                               {"ratio_phi2", drep.levels.back().ratio_phi2},
                               {"refinement_factor", drep.refinement_factor}};
            out.constants[key("deriv_ratio_phi", c, i)] = drep.levels.back().ratio_phi;
        }
        per.push_back(j);
    }
    out.tables["phase.csv"] = std::move(tab);
    if (!dtab.rows.empty()) out.tables["symbol_derivatives.csv"] = std::move(dtab);
    out.summary["kappa0"] = c.kappa0;
    out.summary["per_eps"] = per;
}

// ---- splitting-run and energy-campaign ----------------------------------------

FluidState initial_state(const ExperimentConfig& c, double eps) {
    Grid g = make_grid(c.dim, c.n, c.box_length);
    InitialDataSpec spec;
    spec.delta0 = c.delta0;
    spec.width = c.width;
    spec.seed = c.seed;
    spec.rotational = c.rotational;
    spec.parity = c.parity;
    return make_initial_data(g, c.variant, eps, spec);
}

void horizon_warning(const ExperimentConfig& c, CampaignResult& out) {
    // group speeds stay below 1, so waves re-enter the box after about L/2
    if (c.T > c.box_length / 2)
        out.warnings.push_back("T = " + short_g(c.T) + " exceeds the wraparound horizon L/2 = " +
                               short_g(c.box_length / 2));
}

void splitting_run(const ExperimentConfig& c, CampaignResult& out) {
    horizon_warning(c, out);
    StepOptions so;
    so.cfl = c.cfl;
    json per = json::array();
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        double eps = c.epsilons[i];
        std::string e = " eps=" + short_g(eps);
        CsvTable tab{{"t", "full_H3", "rel_dev", "perturb_H3", "main_curl"}, {}};
        FluidState full = initial_state(c, eps);
        SplitPair pair = make_split(full);
        const int steps = static_cast<int>(std::llround(c.T / c.dt));
        double max_dev = 0, max_curl = 0, max_pert = 0;
        with_context("splitting-run" + e, [&] {
            for (int k = 0; k <= steps; ++k) {
                if (k % c.sample_every == 0 || k == steps) {
                    FluidState sum = pair.main;
                    sum.axpy(1.0, pair.perturb);
                    double nf = state_norm(full);
                    double dev = state_norm(difference(full, sum)) / nf;
                    double pn = state_norm(pair.perturb);
                    double curl = curl_diagnostic(pair.main.u);
                    max_dev = std::max(max_dev, dev);
                    max_curl = std::max(max_curl, curl);
                    max_pert = std::max(max_pert, pn);
                    tab.rows.push_back({k * c.dt, nf, dev, pn, curl});
                }
                if (k < steps) {
                    full = step_full(full, c.dt, so);
                    pair = step_split(pair, c.dt, so);
                }
            }
            return 0;
        });
        std::string file = "split_" + std::to_string(i) + ".csv";
        out.tables[file] = std::move(tab);
        out.series.push_back({"split_eps_" + short_g(eps), file, "t", {"rel_dev", "perturb_H3"}, 0, 0});

        std::vector<FluidState> final_states{full, pair.main, pair.perturb};
        auto bytes = encode_checkpoint(final_states);
        auto back = decode_checkpoint(bytes);
        bool exact = back.size() == 3;
        for (std::size_t s = 0; exact && s < 3; ++s) exact = bit_equal(back[s], final_states[s]);
        out.blobs["final_" + std::to_string(i) + ".ckpt"] = std::string(bytes.begin(), bytes.end());

        add(out, "splitting consistency" + e, max_dev <= c.tol("splitting"), max_dev, c.tol("splitting"));
        add(out, "main flow stays irrotational" + e, max_curl <= c.tol("curl"), max_curl, c.tol("curl"));
        add(out, "checkpoint round trip" + e, exact, exact ? 0.0 : 1.0, 0.0, "bit-exact decode of the final states");
        per.push_back({{"epsilon", eps}, {"max_rel_dev", max_dev}, {"max_curl", max_curl},
                       {"max_perturb_H3", max_pert}, {"perturb_over_eps_delta0", max_pert / (eps * c.delta0)},
                       {"steps", steps}});
        out.constants[key("max_rel_dev", c, i)] = max_dev;
        out.constants[key("perturb_over_eps_delta0", c, i)] = max_pert / (eps * c.delta0);
    }
    out.summary["per_eps"] = per;
}

struct Trajectory {
    std::vector<double> t;
    std::vector<SplitPair> pairs;
    std::vector<FluidState> main, perturb;
};

Trajectory split_trajectory(const FluidState& s0, double T, double dt, int every, const StepOptions& so) {
    Trajectory tr;
    SplitPair p = make_split(s0);
    const int steps = static_cast<int>(std::llround(T / dt));
    for (int k = 0; k <= steps; ++k) {
        if (k % every == 0) {
            tr.t.push_back(k * dt);
            tr.pairs.push_back(p);
            tr.main.push_back(p.main);
            tr.perturb.push_back(p.perturb);
        }
        if (k < steps) p = step_split(p, dt, so);
    }
    return tr;
}

bool all_finite(std::initializer_list<double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// relative change of a fitted constant; constants near zero are compared on an absolute scale
double refine_gap(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

void energy_campaign(const ExperimentConfig& c, CampaignResult& out) {
    horizon_warning(c, out);
    StepOptions so;
    so.cfl = c.cfl;
    PerturbOptions po;
    po.M = c.M;
    json per = json::array();
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        const double eps = c.epsilons[i];
        const std::string e = " eps=" + short_g(eps);
        // the eps r^2 transient of the energy must be resolved by the samples
        const double dt = c.dt * std::min(1.0, 0.2 / eps);
        FluidState s0 = initial_state(c, eps);

        auto [L, R, NS] = with_context("energy-campaign" + e, [&] {
            auto tr = split_trajectory(s0, c.T, dt, c.sample_every, so);
            return std::tuple{energy_inequality_residual(tr.t, tr.main, c.N),
                              perturb_energy_report(tr.t, tr.pairs, c.delta0, po),
                              neg_sobolev_track(tr.t, tr.perturb, c.s, c.tol("interp"))};
        });

        CsvTable etab{{"t", "EN", "dissipation", "dEdt", "majorant", "residual"}, {}};
        for (std::size_t k = 0; k < L.times.size(); ++k)
            etab.rows.push_back({L.times[k], L.EN[k], L.dissipation[k], L.dEdt[k], L.majorant[k], L.residual[k]});
        CsvTable ptab{{"t", "EM", "EM_tilde", "perturb_H3", "ratio", "E_minus_s", "damping"}, {}};
        for (std::size_t k = 0; k < R.points.size(); ++k) {
            const auto& q = R.points[k];
            ptab.rows.push_back({q.t, q.EM, q.EM_tilde, q.perturb_H3, q.perturb_H3 / (c.delta0 * eps), NS.E[k],
                                 q.damping});
        }
        std::string ef = "energy_" + std::to_string(i) + ".csv", pf = "perturb_" + std::to_string(i) + ".csv";
        out.tables[ef] = std::move(etab);
        out.tables[pf] = std::move(ptab);
        out.series.push_back({"energy_eps_" + short_g(eps), ef, "t", {"EN", "dissipation"}, 0, 0});
        out.series.push_back({"perturb_eps_" + short_g(eps), pf, "t", {"ratio", "E_minus_s"}, 0, 0});

        const double rb = c.tol("perturb_ratio");
        add(out, "perturbation bound" + e, R.sup_ratio <= rb, R.sup_ratio, rb, "sup |(n, grad psi, v)|_H3 / (delta0 eps)");
        bool finite = all_finite({L.sup_residual, R.C_fit1, R.C_fit2, R.C_fit20, R.gronwall_constant});
        add(out, "energy residuals finite" + e, finite, L.sup_residual, 0);
        add(out, "modified energy sandwich" + e, R.sandwich_ok && R.cauchy_schwarz_ok, R.sandwich_ok ? 1 : 0, 1);
        add(out, "negative Sobolev bound" + e, NS.bounded, NS.sup, 2 * NS.E0 + NS.C_recorded,
            "s = " + short_g(c.s) + ", C_recorded = " + short_g(NS.C_recorded));
        add(out, "interpolation inequality" + e, NS.max_interp_violation <= c.tol("interp"), NS.max_interp_violation,
            c.tol("interp"));

        json j{{"epsilon", eps},
               {"dt", dt},
               {"samples", L.times.size()},
               {"C_fit", L.sup_residual},
               {"C_fit1", R.C_fit1},
               {"C_fit2", R.C_fit2},
               {"C_fit20", R.C_fit20},
               {"sup_ratio", R.sup_ratio},
               {"delta", R.delta},
               {"gronwall_constant", R.gronwall_constant},
               {"damped_integral", R.damped_integral},
               {"neg_sobolev", {{"s", NS.s}, {"E0", NS.E0}, {"sup", NS.sup}, {"C_recorded", NS.C_recorded}}}};

        if (c.refine) {
            auto [L2, R2] = with_context("energy-campaign refinement" + e, [&] {
                auto tr = split_trajectory(s0, c.T, dt / 2, 2 * c.sample_every, so);
                return std::pair{energy_inequality_residual(tr.t, tr.main, c.N),
                                 perturb_energy_report(tr.t, tr.pairs, c.delta0, po)};
            });
            double gap = std::max({refine_gap(L.sup_residual, L2.sup_residual), refine_gap(R.C_fit1, R2.C_fit1),
                                   refine_gap(R.C_fit2, R2.C_fit2), refine_gap(R.C_fit20, R2.C_fit20),
                                   refine_gap(R.sup_ratio, R2.sup_ratio)});
            add(out, "residuals stable under dt/2" + e, gap <= c.tol("residual_refine"), gap, c.tol("residual_refine"));
            j["refined"] = {{"C_fit", L2.sup_residual}, {"sup_ratio", R2.sup_ratio}, {"gap", gap}};
        }
        per.push_back(j);
        out.constants[key("sup_ratio", c, i)] = R.sup_ratio;
        out.constants[key("C_fit", c, i)] = L.sup_residual;
        out.constants[key("gronwall_constant", c, i)] = R.gronwall_constant;
    }
    out.summary["N"] = c.N;
    out.summary["M"] = c.M;
    out.summary["per_eps"] = per;
}

// ---- sweep and plots ------------------------------------------------------------

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json criteria_json(const std::vector<Criterion>& cs) {
    json a = json::array();
    for (const auto& c : cs)
        a.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold},
                     {"detail", c.detail}});
    return a;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CampaignResult run_campaign(const ExperimentConfig& c) {
    validate(c);
    CampaignResult out;
    out.summary = versioned(to_string(c.kind));
    out.summary["config_hash"] = config_hash(c);
    out.summary["epsilons"] = c.epsilons;
    switch (c.kind) {
        case ExperimentKind::semigroup_verify: semigroup_verify(c, out); break;
        case ExperimentKind::dispersive_scan: dispersive_scan(c, out); break;
        case ExperimentKind::phase_scan: phase_scan(c, out); break;
        case ExperimentKind::splitting_run: splitting_run(c, out); break;
        case ExperimentKind::energy_campaign: energy_campaign(c, out); break;
        case ExperimentKind::ion_suite: ion_suite(c, out); break;
    }
    return out;
}

fs::path run_directory(const ExperimentConfig& c, const fs::path& root) {
    return root / (std::string(to_string(c.kind)) + "-" + config_hash(c).substr(0, 12));
}

RunOutcome run_experiment(const ExperimentConfig& c, const fs::path& dir, bool strict) {
    validate(c);
    auto t0 = std::chrono::steady_clock::now();
    CampaignResult res = run_campaign(c);

    fs::create_directories(dir);
    json outputs = json::array();
    write_atomic(dir / "config.ini", to_ini(c));
    outputs.push_back("config.ini");
    for (const auto& [name, tab] : res.tables) {
        write_csv(dir / name, tab);
        outputs.push_back(name);
    }
    for (const auto& [name, bytes] : res.blobs) {
        write_atomic(dir / name, bytes);
        outputs.push_back(name);
    }
    write_json(dir / "summary.json", res.summary);
    outputs.push_back("summary.json");

    bool criteria_pass = std::all_of(res.criteria.begin(), res.criteria.end(), [](const Criterion& x) { return x.pass; });
    bool pass = criteria_pass && (!strict || res.warnings.empty());

    json m = versioned("manifest");
    m["kind"] = to_string(c.kind);
    m["config_hash"] = config_hash(c);
    m["code_version"] = kCodeVersion;
    m["chi_profile_hash"] = profile_hash();
    m["wall_time_s"] = elapsed(t0);
    m["strict"] = strict;
    m["criteria"] = criteria_json(res.criteria);
    m["warnings"] = res.warnings;
    m["criteria_pass"] = criteria_pass;
    m["pass"] = pass;
    m["constants"] = res.constants;
    json series = json::array();
    for (const auto& s : res.series)
        series.push_back({{"name", s.name}, {"file", s.file}, {"x", s.x}, {"y", s.y},
                          {"predicted_exponent", s.predicted_exponent}, {"anchor", s.anchor}});
    m["series"] = series;
    m["outputs"] = outputs;
    write_json(dir / "manifest.json", m);
    return {dir, m, pass};
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& tmpl) {
    if (tmpl.sweep_axis.empty()) throw ConfigError("sweep.axis", "missing");
    const SweepAxis axis = axis_from_string(tmpl.sweep_axis);
    if (tmpl.sweep_values.empty()) throw ConfigError("sweep.values", "empty axis");
    std::vector<ExperimentConfig> out;
    for (std::size_t i = 0; i < tmpl.sweep_values.size(); ++i) {
        double v = tmpl.sweep_values[i];
        if (!std::isfinite(v)) throw ConfigError("sweep.values", "non-finite value");
        ExperimentConfig c = tmpl;
        c.sweep_axis.clear();
        c.sweep_values.clear();
        switch (axis) {
            case SweepAxis::epsilon: c.epsilons = {v}; break;
            case SweepAxis::kappa0: c.kappa0 = v; break;
            case SweepAxis::grid: {
                if (v != std::floor(v)) throw ConfigError("sweep.values", "grid values must be integers");
                int n = static_cast<int>(v);
                // the resolution knob of each campaign kind
                switch (c.kind) {
                    case ExperimentKind::semigroup_verify: c.samples = n; break;
                    case ExperimentKind::dispersive_scan:
                    case ExperimentKind::ion_suite: c.x_samples = n; break;
                    case ExperimentKind::phase_scan: c.n0 = n; break;
                    default: c.n = n;
                }
                break;
            }
        }
        try {
            validate(c);
        } catch (const ConfigError& e) {
            throw ConfigError(e.field, "sweep point " + std::to_string(i) + " (" + short_g(v) + "): " + e.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

Runner in_process_runner(bool strict) {
    return [strict](const ExperimentConfig& c, const fs::path& dir) { return run_experiment(c, dir, strict).manifest; };
}

SweepOutcome run_sweep(const ExperimentConfig& tmpl, const fs::path& dir, int workers, const Runner& runner) {
    auto points = expand_sweep(tmpl);  // any validation failure stops us before launch
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(dir);
    write_atomic(dir / "sweep.ini", to_ini(tmpl));

    const std::size_t np = points.size();
    std::vector<json> manifests(np);
    std::vector<std::string> errors(np);
    std::vector<char> reused(np, 0);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < np;) {
            fs::path pd = dir / ("point-" + std::to_string(i));
            try {
                if (fs::exists(pd / "manifest.json")) {
                    json old = json::parse(read_file(pd / "manifest.json"));
                    if (old.value("config_hash", "") == config_hash(points[i]) &&
                        old.value("code_version", "") == kCodeVersion) {
                        manifests[i] = std::move(old);
                        reused[i] = 1;
                        continue;
                    }
                }
                manifests[i] = runner(points[i], pd);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(workers, static_cast<int>(np)); ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    // uniformity: every constant reported by all points
    std::map<std::string, std::vector<double>> vals;
    for (std::size_t i = 0; i < np; ++i)
        if (errors[i].empty() && manifests[i].contains("constants"))
            for (const auto& [k, v] : manifests[i]["constants"].items()) vals[k].push_back(v.get<double>());
    json uni = json::object();
    for (const auto& [k, v] : vals) {
        if (v.size() != np) continue;
        double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
        json u{{"min", lo}, {"max", hi}, {"spread", hi - lo}, {"values", v}};
        u["ratio"] = lo > 0 ? json(hi / lo) : json(nullptr);
        uni[k] = u;
    }

    CsvTable tab{{"value", "pass"}, {}};
    std::vector<std::string> ckeys;
    for (const auto& [k, v] : uni.items()) ckeys.push_back(k);
    for (const auto& k : ckeys) tab.header.push_back(k);
    bool pass = true;
    json pts = json::array();
    for (std::size_t i = 0; i < np; ++i) {
        bool ok = errors[i].empty() && manifests[i].value("pass", false);
        pass = pass && ok;
        std::vector<double> row{tmpl.sweep_values[i], ok ? 1.0 : 0.0};
        for (const auto& k : ckeys) row.push_back(uni[k]["values"][i].get<double>());
        tab.rows.push_back(row);
        json p{{"value", tmpl.sweep_values[i]}, {"dir", "point-" + std::to_string(i)},
               {"config_hash", config_hash(points[i])}, {"pass", ok}, {"reused", reused[i] != 0}};
        if (!errors[i].empty()) p["error"] = errors[i];
        pts.push_back(p);
    }
    write_csv(dir / "sweep.csv", tab);

    json m = versioned("sweep");
    m["kind"] = to_string(tmpl.kind);
    m["axis"] = tmpl.sweep_axis;
    m["values"] = tmpl.sweep_values;
    m["config_hash"] = config_hash(tmpl);
    m["code_version"] = kCodeVersion;
    m["chi_profile_hash"] = profile_hash();
    m["wall_time_s"] = elapsed(t0);
    m["workers"] = workers;
    m["points"] = pts;
    m["uniformity"] = uni;
    m["pass"] = pass;
    m["outputs"] = {"sweep.ini", "sweep.csv"};
    write_json(dir / "manifest.json", m);
    return {dir, m, pass};
}

PlotOutcome emit_plots(const fs::path& manifest, const fs::path& out_dir) {
    PlotOutcome out;
    json m = json::parse(read_file(manifest));
    if (!m.contains("series") || m["series"].empty()) {
        out.warnings.push_back("manifest " + manifest.string() + " lists no series; nothing to plot");
        return out;
    }
    const fs::path base = manifest.parent_path();
    fs::create_directories(out_dir);
    for (const auto& s : m["series"]) {
        const std::string name = s.at("name"), file = s.at("file"), xname = s.at("x");
        const auto ynames = s.at("y").get<std::vector<std::string>>();
        const double pexp = s.value("predicted_exponent", 0.0), anchor = s.value("anchor", 0.0);
        fs::path csv = base / file;
        if (!fs::exists(csv)) throw std::runtime_error("missing series " + name + ": " + csv.string());

        std::istringstream is(read_file(csv));
        std::string line;
        std::getline(is, line);
        std::vector<std::string> header;
        boost::algorithm::split(header, line, boost::algorithm::is_any_of(","));
        auto col = [&](const std::string& c) {
            auto it = std::find(header.begin(), header.end(), c);
            if (it == header.end()) throw std::runtime_error("series " + name + ": no column '" + c + "' in " + file);
            return static_cast<std::size_t>(it - header.begin());
        };
        std::vector<std::size_t> cols{col(xname)};
        for (const auto& y : ynames) cols.push_back(col(y));

        std::vector<std::vector<double>> rows;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::vector<std::string> f;
            boost::algorithm::split(f, line, boost::algorithm::is_any_of(","));
            if (f.size() != header.size()) throw std::runtime_error("series " + name + ": ragged row in " + file);
            std::vector<double> r;
            for (auto ci : cols) r.push_back(std::strtod(f[ci].c_str(), nullptr));
            rows.push_back(std::move(r));
        }
        if (rows.empty()) throw std::runtime_error("missing series " + name + ": " + file + " has no rows");

        std::string dat = "# " + xname;
        for (const auto& y : ynames) dat += " " + y;
        if (pexp != 0) {
            dat += " predicted";
            std::size_t a = 0;
            while (a + 1 < rows.size() && rows[a][0] < anchor) ++a;
            for (auto& r : rows) r.push_back(rows[a][1] * std::pow(r[0] / rows[a][0], -pexp));
        }
        dat += "\n";
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) dat += (k ? " " : "") + g17(r[k]);
            dat += "\n";
        }
        fs::path datp = out_dir / (name + ".dat");
        write_atomic(datp, dat);

        std::ostringstream gp;
        gp << "# gnuplot script for " << name << "\n"
           << "set terminal pngcairo size 900,600\n"
           << "set output '" << name << ".png'\n"
           << "set xlabel '" << xname << "'\n"
           << "set key top right\n";
        if (pexp != 0) gp << "set logscale xy\n";
        gp << "plot ";
        for (std::size_t k = 0; k < ynames.size(); ++k)
            gp << (k ? ", \\\n     " : "") << "'" << name << ".dat' using 1:" << k + 2 << " with linespoints title '"
               << ynames[k] << "'";
        if (pexp != 0)
            gp << ", \\\n     '" << name << ".dat' using 1:" << ynames.size() + 2
               << " with lines dashtype 2 title 'predicted t^{-" << short_g(pexp) << "}'";
        gp << "\n";
        fs::path gpp = out_dir / (name + ".gp");
        write_atomic(gpp, gp.str());
        out.files.push_back(datp);
        out.files.push_back(gpp);
    }
    return out;
}

}  // namespace nsplab
