#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "bp/math.hpp"
#include "bp/sabr.hpp"
#include "bp/sln.hpp"

namespace bp {

// Hyperbolic-exponential tail extrapolation: prices are mapped through the
// chi transform, damped cubics are added per wing, and the map is inverted.
// The correction vanishes faster than any power of x at the money, so the
// base model is reproduced exactly there.
struct HexParams {
    std::variant<SlnParams, SabrParams> base;
    std::array<double, 3> theta_left{0.0, 0.0, 0.0};   // x, x^2, x^3 coefficients
    std::array<double, 3> theta_right{0.0, 0.0, 0.0};
    double a = 0.01;     // damping constant in exp(-a/x^2)
    double pi_atm = 0.0; // forward ATM price anchoring the transform

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("HexParams: a must be > 0");
        if (!(pi_atm > 0.0)) throw std::invalid_argument("HexParams: pi_atm must be > 0");
        std::visit([](const auto& b) { b.validate(); }, base);
    }
};

namespace detail {

inline double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

inline double cubic_no_const(const std::array<double, 3>& c, double x) {
    return x * (c[0] + x * (c[1] + x * c[2]));
}

inline double damp(double a, double x) { return x == 0.0 ? 0.0 : std::exp(-a / (x * x)); }

}  // namespace detail

inline double hex_base_put_fwd(const HexParams& p, double F, double K, double T) {
    return std::visit(
        [&](const auto& b) {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, SlnParams>)
                return sln_put(b, F, K);
            else
                return sabr_put(b, F, K, T);
        },
        p.base);
}

inline double hex_base_call_fwd(const HexParams& p, double F, double K, double T) {
    return hex_base_put_fwd(p, F, K, T) + (F - K);
}

inline double hex_pi_atm(const std::variant<SlnParams, SabrParams>& base, double F, double T) {
    return std::visit(
        [&](const auto& b) {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, SlnParams>)
                return sln_call(b, F, F);
            else
                return sabr_call(b, F, F, T);
        },
        base);
}

// chi <-> price transform (forward units). put_from_chi(chi_from_put(P)) == P.
inline double hex_chi_from_put(double put_fwd, double pi_atm) {
    if (!(put_fwd > 0.0)) throw std::domain_error("hex: chi transform needs a positive put price");
    double e = std::expm1(std::log(2.0) * put_fwd / pi_atm);  // 2^(P/pi) - 1
    return std::log(e);
}

inline double hex_chi_from_call(double call_fwd, double pi_atm) {
    if (!(call_fwd > 0.0))
        throw std::domain_error("hex: chi transform needs a positive call price");
    double e = std::expm1(std::log(2.0) * call_fwd / pi_atm);
    return -std::log(e);
}

inline double hex_put_from_chi(double chi, double pi_atm) {
    return pi_atm / std::log(2.0) * detail::softplus(chi);
}

inline double hex_call_from_chi(double chi, double pi_atm) {
    return pi_atm / std::log(2.0) * detail::softplus(-chi);
}

namespace detail {

inline double hex_otm_put_fwd(const HexParams& p, double F, double K, double T) {
    double x = (K - F) / F;
    double chi = hex_chi_from_put(hex_base_put_fwd(p, F, K, T), p.pi_atm) +
                 cubic_no_const(p.theta_left, x) * damp(p.a, x);
    return hex_put_from_chi(chi, p.pi_atm);
}

inline double hex_otm_call_fwd(const HexParams& p, double F, double K, double T) {
    double x = (K - F) / F;
    double chi = hex_chi_from_call(hex_base_call_fwd(p, F, K, T), p.pi_atm) +
                 cubic_no_const(p.theta_right, x) * damp(p.a, x);
    return hex_call_from_chi(chi, p.pi_atm);
}

}  // namespace detail

// OTM side priced through its own chi wing, the other side via parity.
inline double hex_put(const HexParams& p, double F, double K, double T, double D = 1.0,
                      double V = 1.0) {
    if (K <= F) return D * V * detail::hex_otm_put_fwd(p, F, K, T);
    return D * V * (detail::hex_otm_call_fwd(p, F, K, T) - (F - K));
}

inline double hex_call(const HexParams& p, double F, double K, double T, double D = 1.0,
                       double V = 1.0) {
    return hex_put(p, F, K, T, D, V) + D * V * (F - K);
}

inline double hex_cdf(const HexParams& p, double F, double K, double T) {
    const double h = 1e-4 * F;
    double c = (hex_put(p, F, K + h, T) - hex_put(p, F, K - h, T)) / (2.0 * h);
    return std::min(1.0, std::max(0.0, c));
}

}  // namespace bp
