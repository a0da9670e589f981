#include "nsplab/cutoff.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace nsplab {

void validate(const CutoffParams& p) {
    if (!(p.epsilon > 0 && p.epsilon <= 1))
        throw std::invalid_argument("epsilon must lie in (0,1]");
    if (!(p.kappa0 > 0)) throw std::invalid_argument("kappa0 must be positive");
}

static double bump(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

double smooth_step(double r, double a, double b) {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    double s = (r - a) / (b - a);
    double u = bump(1.0 - s), v = bump(s);
    return u / (u + v);
}

double chi_low(double r, const CutoffParams& p) {
    return chi_profile(std::sqrt(p.epsilon / p.kappa0) * r);
}

double chi_tilde_low(double r, const CutoffParams& p) {
    return chi_tilde_profile(std::sqrt(p.epsilon / p.kappa0) * r);
}

double chi_high(double r, const CutoffParams& p) { return 1.0 - chi_low(r, p); }

double lp_symbol(int j, double r) {
    if (j < 0) throw std::invalid_argument("littlewood-paley index must be >= 0");
    if (j == 0) return chi_profile(r);
    double s = std::ldexp(r, -j);
    return chi_profile(s) - chi_profile(2 * s);
}

std::string profile_hash() {
    std::uint64_t h = 1469598103934665603ull;
    char buf[64];
    auto mix = [&](double v) {
        int len = std::snprintf(buf, sizeof buf, "%.17g;", v);
        for (int i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    };
    for (int i = 0; i <= 4000; ++i) {
        double z = 5.0 * i / 4000.0;
        mix(chi_profile(z));
        mix(chi_tilde_profile(z));
    }
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nsplab
