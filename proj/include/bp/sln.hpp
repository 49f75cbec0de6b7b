#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bp/math.hpp"

namespace bp {

// Shifted log-normal smile: S_T = F (1 + (Y - 1)/q) with Y lognormal,
// E[Y] = 1, log-sd |q|*sigma_bar. Degenerates to Bachelier as q -> 0.
struct SlnParams {
    double sigma_bar = 0.0;  // total vol over the slice horizon
    double q = 0.0;          // skew; s = q*sigma_bar

    void validate() const {
        if (!(sigma_bar > 0.0)) throw std::invalid_argument("SlnParams: sigma_bar must be > 0");
        if (!std::isfinite(q)) throw std::invalid_argument("SlnParams: q must be finite");
    }
};

namespace detail {
inline constexpr double kSlnSeriesEps = 1e-8;  // |q|*sigma_bar below this -> Bachelier limit

inline double sln_log_arg(const SlnParams& p, double F, double K) {
    double a = 1.0 + p.q * (K - F) / F;
    if (!(a > 0.0))
        throw std::domain_error("sln: log argument 1+q(K-F)/F <= 0 at strike " +
                                std::to_string(K));
    return a;
}
}  // namespace detail

struct SlnD12 {
    double d1, d2;
};

inline SlnD12 sln_d12(const SlnParams& p, double F, double K) {
    double s = p.q * p.sigma_bar;
    double a = detail::sln_log_arg(p, F, K);
    double d2 = -std::log(a) / s - 0.5 * s;
    return {d2 + s, d2};
}

// boundary of the support, F(1 - 1/q); upper bound for q<0, lower for q>0
inline double sln_support_bound(const SlnParams& p, double F) {
    return F * (1.0 - 1.0 / p.q);
}

inline double sln_call(const SlnParams& p, double F, double K, double D = 1.0, double V = 1.0) {
    if (std::fabs(p.q) * p.sigma_bar < detail::kSlnSeriesEps)
        return D * V * bachelier_call(F, K, p.sigma_bar);
    auto [d1, d2] = sln_d12(p, F, K);
    return D * V * ((F - K) * norm_cdf(d2) + F / p.q * (norm_cdf(d1) - norm_cdf(d2)));
}

inline double sln_put(const SlnParams& p, double F, double K, double D = 1.0, double V = 1.0) {
    if (std::fabs(p.q) * p.sigma_bar < detail::kSlnSeriesEps)
        return D * V * bachelier_put(F, K, p.sigma_bar);
    auto [d1, d2] = sln_d12(p, F, K);
    return D * V * ((K - F) * norm_cdf(-d2) + F / p.q * (norm_cdf(d1) - norm_cdf(d2)));
}

inline double sln_cdf(const SlnParams& p, double F, double K) {
    if (std::fabs(p.q) * p.sigma_bar < detail::kSlnSeriesEps)
        return norm_cdf((K - F) / (F * p.sigma_bar));
    auto d = sln_d12(p, F, K);
    return norm_cdf(-d.d2);
}

inline double sln_pdf(const SlnParams& p, double F, double phi) {
    double s = p.q * p.sigma_bar;
    if (std::fabs(s) < detail::kSlnSeriesEps) {
        double sig = p.sigma_bar * F;
        return norm_pdf((phi - F) / sig) / sig;
    }
    double y = 1.0 + p.q * (phi - F) / F;
    if (y <= 0.0) return 0.0;
    double sa = std::fabs(s);
    double z = (std::log(y) + 0.5 * s * s) / sa;
    return std::fabs(p.q) / F * norm_pdf(z) / (y * sa);
}

inline double sln_quantile(const SlnParams& p, double F, double u) {
    double s = p.q * p.sigma_bar;
    if (std::fabs(s) < detail::kSlnSeriesEps) return F * (1.0 + p.sigma_bar * norm_ppf(u));
    double y = std::exp(s * norm_ppf(u) - 0.5 * s * s);
    return F * (1.0 + (y - 1.0) / p.q);
}

}  // namespace bp
