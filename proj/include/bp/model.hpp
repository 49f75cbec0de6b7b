#pragma once

#include <string>
#include <variant>

#include "bp/hex.hpp"
#include "bp/sabr.hpp"
#include "bp/sln.hpp"

namespace bp {

using ModelParams = std::variant<SlnParams, SabrParams, HexParams>;

inline void model_validate(const ModelParams& m) {
    std::visit([](const auto& p) { p.validate(); }, m);
}

inline std::string model_kind(const ModelParams& m) {
    struct V {
        std::string operator()(const SlnParams&) const { return "sln"; }
        std::string operator()(const SabrParams&) const { return "sabr"; }
        std::string operator()(const HexParams&) const { return "hex"; }
    };
    return std::visit(V{}, m);
}

inline double model_put(const ModelParams& m, double F, double K, double T, double D = 1.0,
                        double V = 1.0) {
    struct V_ {
        double F, K, T, D, V;
        double operator()(const SlnParams& p) const { return sln_put(p, F, K, D, V); }
        double operator()(const SabrParams& p) const { return sabr_put(p, F, K, T, D, V); }
        double operator()(const HexParams& p) const { return hex_put(p, F, K, T, D, V); }
    };
    return std::visit(V_{F, K, T, D, V}, m);
}

inline double model_call(const ModelParams& m, double F, double K, double T, double D = 1.0,
                         double V = 1.0) {
    return model_put(m, F, K, T, D, V) + D * V * (F - K);
}

inline double model_cdf(const ModelParams& m, double F, double K, double T) {
    struct V_ {
        double F, K, T;
        double operator()(const SlnParams& p) const { return sln_cdf(p, F, K); }
        double operator()(const SabrParams& p) const { return sabr_cdf(p, F, K, T); }
        double operator()(const HexParams& p) const { return hex_cdf(p, F, K, T); }
    };
    return std::visit(V_{F, K, T}, m);
}

}  // namespace bp
