#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "bp/math.hpp"

namespace bp {

// Hagan-style normal-vol parametrization used purely as a price interpolant:
// sigma_N(x) = sigma1 * xi/H(xi). Negative rho lifts the put wing.
struct SabrParams {
    double sigma1 = 0.0;  // total ATM vol over the slice horizon
    double rho = 0.0;
    double nu = 0.0;  // vol of vol, per sqrt(year)
    double beta = 1.0;

    void validate() const {
        if (!(sigma1 > 0.0)) throw std::invalid_argument("SabrParams: sigma1 must be > 0");
        if (!(rho >= -1.0 && rho <= 1.0))
            throw std::invalid_argument("SabrParams: rho must be in [-1,1]");
        if (!(nu >= 0.0)) throw std::invalid_argument("SabrParams: nu must be >= 0");
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("SabrParams: beta must be in [0,1]");
    }
};

namespace detail {
inline constexpr double kXiSeriesEps = 1e-6;
}

// xi(x): x for beta=0, ln(1+x) for beta=1, ((1+x)^(1-beta)-1)/(1-beta) between
inline double sabr_xi(const SabrParams& p, double x, double T) {
    double c = p.nu * std::sqrt(T) / p.sigma1;
    if (p.beta == 0.0) return c * x;
    if (1.0 + x <= 0.0)
        throw std::domain_error("sabr: strike below zero-forward bound, x = " + std::to_string(x));
    if (p.beta == 1.0) return c * std::log1p(x);
    return c * (std::pow(1.0 + x, 1.0 - p.beta) - 1.0) / (1.0 - p.beta);
}

inline double sabr_vol(const SabrParams& p, double F, double K, double T) {
    double x = (K - F) / F;
    double xi = sabr_xi(p, x, T);
    if (std::fabs(xi) < detail::kXiSeriesEps)
        return p.sigma1 *
               (1.0 + 0.5 * p.rho * xi + (2.0 - 3.0 * p.rho * p.rho) * xi * xi / 12.0);
    double H;
    if (p.rho <= -1.0) {
        if (xi >= 1.0)
            throw std::domain_error("sabr: H undefined for rho=-1, xi>=1 at strike " +
                                    std::to_string(K));
        H = -std::log1p(-xi);
    } else if (p.rho >= 1.0) {
        if (xi <= -1.0)
            throw std::domain_error("sabr: H undefined for rho=1, xi<=-1 at strike " +
                                    std::to_string(K));
        H = std::log1p(xi);
    } else {
        double arg = (std::sqrt(1.0 + 2.0 * p.rho * xi + xi * xi) + xi + p.rho) / (1.0 + p.rho);
        if (!(arg > 0.0))
            throw std::domain_error("sabr: H log-argument <= 0 at strike " + std::to_string(K));
        H = std::log(arg);
    }
    double v = p.sigma1 * xi / H;
    if (!(v > 0.0))
        throw std::domain_error("sabr: non-positive vol at strike " + std::to_string(K));
    return v;
}

inline double sabr_put(const SabrParams& p, double F, double K, double T, double D = 1.0,
                       double V = 1.0) {
    double sN = sabr_vol(p, F, K, T);
    return D * V * bachelier_put(F, K, sN);
}

inline double sabr_call(const SabrParams& p, double F, double K, double T, double D = 1.0,
                        double V = 1.0) {
    return sabr_put(p, F, K, T, D, V) + D * V * (F - K);
}

// dP/dK = N(x/sigma_N) + dsigma_N/dx * phi(x/sigma_N); the vol slope via
// central differences, h = 1e-4 in moneyness (= 1e-4*F in strike).
inline double sabr_cdf(const SabrParams& p, double F, double K, double T) {
    double x = (K - F) / F;
    const double h = 1e-4;
    double sN = sabr_vol(p, F, K, T);
    double sp = sabr_vol(p, F, F * (1.0 + x + h), T);
    double sm = sabr_vol(p, F, F * (1.0 + x - h), T);
    double slope = (sp - sm) / (2.0 * h);
    double u = x / sN;
    double c = norm_cdf(u) + slope * norm_pdf(u);
    return std::min(1.0, std::max(0.0, c));
}

}  // namespace bp
