#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bp/density.hpp"

namespace bp {

enum class ProductKind { BonusCertificate, BarrierReverseConvertible };
enum class BarrierStyle { European, American };

struct ProductSpec {
    ProductKind kind = ProductKind::BonusCertificate;
    BarrierStyle barrier_style = BarrierStyle::European;
    double S0 = 0.0;
    double B = 0.0;
    double K = 0.0;  // bonus certificate strike
    double R = 0.0;  // reverse convertible coupon, price units
    double T = 0.0;

    void validate() const {
        if (!(S0 > 0.0)) throw std::invalid_argument("ProductSpec: S0 must be > 0");
        if (!(B > 0.0 && B < S0)) throw std::invalid_argument("ProductSpec: need 0 < B < S0");
        if (!(T > 0.0)) throw std::invalid_argument("ProductSpec: T must be > 0");
        if (kind == ProductKind::BonusCertificate) {
            if (!(K >= S0))
                throw std::invalid_argument("ProductSpec: bonus certificate needs K >= S0 > B");
        } else {
            if (!(R >= 0.0)) throw std::invalid_argument("ProductSpec: coupon R must be >= 0");
            if (!(B <= 0.75 * (S0 + R)))
                throw std::invalid_argument(
                    "ProductSpec: reverse convertible needs B <= 3/4 (S0 + R)");
        }
    }
};

struct PricingContext {
    double F = 0.0;  // forward at product maturity
    double D = 1.0;
    double V = 1.0;
};

// everything the American closed forms consume
struct PricingInputs {
    double p_h_minus = 0.0;
    double call_K = 0.0;  // forward units
    double put_B = 0.0;   // forward units
    double delta = 0.0;
    std::optional<double> epsilon;  // MC tail-correction estimate, forward units
    PricingContext ctx;
};

struct PriceReport {
    struct Term {
        std::string name;
        double value;
    };
    double price = 0.0;
    std::vector<Term> breakdown;  // sums exactly to price
    std::vector<std::string> warnings;

    double term(const std::string& name) const {
        for (const auto& t : breakdown)
            if (t.name == name) return t.value;
        throw std::invalid_argument("PriceReport: no term '" + name + "'");
    }

   private:
    friend PriceReport finalize_report(std::vector<Term> terms, std::vector<std::string> warnings);
};

inline PriceReport finalize_report(std::vector<PriceReport::Term> terms,
                                   std::vector<std::string> warnings = {}) {
    PriceReport r;
    r.breakdown = std::move(terms);
    r.warnings = std::move(warnings);
    double s = 0.0;
    for (const auto& t : r.breakdown) s += t.value;
    r.price = s;
    return r;
}

// probability of finishing below the barrier, read off the terminal cdf
inline double p_h_minus(const Density& density, double B) { return density.cdf_at(B); }

// Pi = K - (K-B) pH- + Call(K) - Put(B), all read from the same density
inline PriceReport price_ebc(const ProductSpec& spec, const Density& density,
                             const PricingContext& ctx) {
    spec.validate();
    if (spec.kind != ProductKind::BonusCertificate || spec.barrier_style != BarrierStyle::European)
        throw std::invalid_argument("price_ebc: spec is not a European bonus certificate");
    double dv = ctx.D * ctx.V;
    double p = p_h_minus(density, spec.B);
    return finalize_report({{"leading", dv * spec.K},
                            {"barrier", -dv * (spec.K - spec.B) * p},
                            {"option", dv * density.call_moment(spec.K)},
                            {"put_b", -dv * density.put_moment(spec.B)}});
}

// Pi = S0 + R - (S0+R-B) pH- - Put(B)
inline PriceReport price_ebrc(const ProductSpec& spec, const Density& density,
                              const PricingContext& ctx) {
    spec.validate();
    if (spec.kind != ProductKind::BarrierReverseConvertible ||
        spec.barrier_style != BarrierStyle::European)
        throw std::invalid_argument("price_ebrc: spec is not a European reverse convertible");
    double dv = ctx.D * ctx.V;
    double c0 = spec.S0 + spec.R;
    double p = p_h_minus(density, spec.B);
    return finalize_report({{"leading", dv * c0},
                            {"barrier", -dv * (c0 - spec.B) * p},
                            {"put_b", -dv * density.put_moment(spec.B)}});
}

namespace detail {

inline std::vector<std::string> epsilon_warnings(const PricingInputs& in, double price,
                                                 double option_term) {
    std::vector<std::string> w;
    if (in.epsilon) {
        double eps = *in.epsilon * in.ctx.D * in.ctx.V;
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "tail correction epsilon = %.6g (%.4f%% of price): additive reading "
                      "price-eps = %.10g; multiplicative reading scales the option term by %.8g",
                      eps, price != 0.0 ? 100.0 * eps / price : 0.0, price - eps,
                      option_term != 0.0 ? 1.0 - eps / option_term : 0.0);
        w.push_back(buf);
    }
    return w;
}

}  // namespace detail

// Pi ~= K - (K-B)(2+delta) pH- + Call(K); the delta term is the only
// path-dependent piece and is kept as its own breakdown entry.
inline PriceReport price_abc(const ProductSpec& spec, const PricingInputs& in) {
    spec.validate();
    if (spec.kind != ProductKind::BonusCertificate || spec.barrier_style != BarrierStyle::American)
        throw std::invalid_argument("price_abc: spec is not an American bonus certificate");
    if (!(in.p_h_minus >= 0.0 && in.p_h_minus <= 1.0))
        throw std::invalid_argument("price_abc: p_h_minus outside [0,1]");
    double dv = in.ctx.D * in.ctx.V;
    double option = dv * in.call_K;
    auto r = finalize_report({{"leading", dv * spec.K},
                              {"barrier", -dv * (spec.K - spec.B) * 2.0 * in.p_h_minus},
                              {"delta_correction", -dv * (spec.K - spec.B) * in.delta * in.p_h_minus},
                              {"option", option}});
    r.warnings = detail::epsilon_warnings(in, r.price, option);
    return r;
}

// Pi ~= S0 + R - (S0+R-B)(2+delta) pH-
inline PriceReport price_abrc(const ProductSpec& spec, const PricingInputs& in) {
    spec.validate();
    if (spec.kind != ProductKind::BarrierReverseConvertible ||
        spec.barrier_style != BarrierStyle::American)
        throw std::invalid_argument("price_abrc: spec is not an American reverse convertible");
    if (!(in.p_h_minus >= 0.0 && in.p_h_minus <= 1.0))
        throw std::invalid_argument("price_abrc: p_h_minus outside [0,1]");
    double dv = in.ctx.D * in.ctx.V;
    double c0 = spec.S0 + spec.R;
    auto r = finalize_report({{"leading", dv * c0},
                              {"barrier", -dv * (c0 - spec.B) * 2.0 * in.p_h_minus},
                              {"delta_correction", -dv * (c0 - spec.B) * in.delta * in.p_h_minus}});
    r.warnings = detail::epsilon_warnings(in, r.price, 0.0);
    return r;
}

// barrier/strike separation condition: (3/2)(K-B)/K >= sigma_ATM_1y sqrt(T)
struct SeparationCheck {
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;

    std::string message() const {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "separation condition %s: (3/2)(K-B)/K = %.6g %s sigma_1y*sqrt(dT) = %.6g",
                      pass ? "holds" : "VIOLATED", lhs, pass ? ">=" : "<", rhs);
        return buf;
    }
};

inline SeparationCheck validate_separation(const ProductSpec& spec, double sigma_atm_1y) {
    if (!(sigma_atm_1y > 0.0))
        throw std::invalid_argument("validate_separation: sigma_atm_1y must be > 0");
    double ref = spec.kind == ProductKind::BonusCertificate ? spec.K : spec.S0 + spec.R;
    SeparationCheck c;
    c.lhs = 1.5 * (ref - spec.B) / ref;
    c.rhs = sigma_atm_1y * std::sqrt(spec.T);
    c.pass = c.lhs >= c.rhs;
    return c;
}

}  // namespace bp
