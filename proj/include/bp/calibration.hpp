#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bp/market_data.hpp"
#include "bp/math.hpp"
#include "bp/model.hpp"
#include "bp/rng.hpp"

namespace bp {

// ---------------------------------------------------------------- optimizer

struct NmOptions {
    int max_iter = 5000;
    double ftol = 1e-10;
};

struct NmResult {
    std::vector<double> x;
    double fmin = 0.0;
    int iterations = 0;
    bool converged = false;
};

// textbook Nelder-Mead on R^n
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            std::vector<double> x0, const std::vector<double>& step,
                            NmOptions opt = {}) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step[i];
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    auto order = [&] {
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = i; j > 0 && fs[j] < fs[j - 1]; --j) {
                std::swap(fs[j], fs[j - 1]);
                std::swap(xs[j], xs[j - 1]);
            }
    };
    order();

    NmResult res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (fs[n] - fs[0] < opt.ftol * (1.0 + std::fabs(fs[0]))) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += xs[i][j] / n;
        auto at = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (xs[n][j] - centroid[j]);
            return p;
        };
        auto xr = at(-1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            auto xe = at(-2.0);
            double fe = f(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            auto xc = at(fr < fs[n] ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        xs[i][j] = xs[0][j] + 0.5 * (xs[i][j] - xs[0][j]);
                    fs[i] = f(xs[i]);
                }
            }
        }
        order();
    }
    res.x = xs[0];
    res.fmin = fs[0];
    res.iterations = it;
    return res;
}

// ---------------------------------------------------------------- objective

// Relative least squares over OTM quotes: puts at strikes <= F, calls above.
inline double objective_e2(const ModelParams& m, const MarketSlice& s) {
    double tot = 0.0;
    int used = 0;
    for (const auto& q : s.quotes) {
        bool put_side = q.strike <= s.forward;
        const std::optional<double>& mkt = put_side ? q.put_price : q.call_price;
        if (!mkt) continue;
        double mod = put_side
                         ? model_put(m, s.forward, q.strike, s.time_to_maturity, s.discount, s.volume)
                         : model_call(m, s.forward, q.strike, s.time_to_maturity, s.discount,
                                      s.volume);
        if (!(mod > 0.0))
            throw std::domain_error("objective_e2: non-positive model price at strike " +
                                    std::to_string(q.strike));
        double r = (*mkt - mod) / (*mkt + mod);
        tot += r * r;
        ++used;
    }
    if (used == 0) throw std::invalid_argument("objective_e2: no usable OTM quotes");
    return tot;
}

inline int count_usable_quotes(const MarketSlice& s) {
    int n = 0;
    for (const auto& q : s.quotes) {
        if (q.strike <= s.forward && q.put_price) ++n;
        if (q.strike > s.forward && q.call_price) ++n;
    }
    return n;
}

// ---------------------------------------------------------------- calibrate

enum class ModelKind { Sln, Sabr0, Sabr1, HexSln };

inline std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Sln: return "sln";
        case ModelKind::Sabr0: return "sabr0";
        case ModelKind::Sabr1: return "sabr1";
        case ModelKind::HexSln: return "hex";
    }
    return "?";
}

inline ModelKind model_kind_from_name(const std::string& s) {
    if (s == "sln") return ModelKind::Sln;
    if (s == "sabr0") return ModelKind::Sabr0;
    if (s == "sabr1") return ModelKind::Sabr1;
    if (s == "hex") return ModelKind::HexSln;
    throw std::invalid_argument("unknown model kind '" + s + "' (want sln|sabr0|sabr1|hex)");
}

struct FitResult {
    ModelParams params;
    double objective = 0.0;
    int n_quotes = 0;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

inline double atm_price_guess(const MarketSlice& s) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<double> px;
    for (const auto& q : s.quotes) {
        double d = std::fabs(q.strike - s.forward);
        if (d < best) {
            if (q.put_price && q.call_price)
                px = 0.5 * (*q.put_price + *q.call_price);
            else if (q.put_price)
                px = q.put_price;
            else if (q.call_price)
                px = q.call_price;
            else
                continue;
            best = d;
        }
    }
    if (!px || !(*px > 0.0))
        throw std::invalid_argument("calibrate: no usable near-ATM quote for initialization");
    return *px;
}

// objective with domain failures turned into a graded penalty for the simplex
inline double penalized_e2(const ModelParams& m, const MarketSlice& s) {
    try {
        return objective_e2(m, s);
    } catch (const std::domain_error&) {
        return 1e8;
    }
}

struct Restarts {
    // deterministic jitter around the base starting point
    static std::vector<std::vector<double>> make(const std::vector<double>& x0, int count,
                                                 double scale = 0.3) {
        std::vector<std::vector<double>> out{x0};
        for (int r = 1; r < count; ++r) {
            std::vector<double> x = x0;
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += scale * (2.0 * rng::uniform(0xC0FFEEu, r, i) - 1.0);
            out.push_back(x);
        }
        return out;
    }
};

inline NmResult best_of_restarts(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& x0, const std::vector<double>& step) {
    NmResult best;
    best.fmin = std::numeric_limits<double>::infinity();
    int total_iters = 0;
    for (const auto& start : Restarts::make(x0, 3)) {
        NmResult r = nelder_mead(f, start, step);
        total_iters += r.iterations;
        if (r.fmin < best.fmin) {
            bool conv = r.converged;
            best = r;
            best.converged = conv;
        }
    }
    best.iterations = total_iters;
    return best;
}

}  // namespace detail

inline FitResult calibrate(const MarketSlice& slice, ModelKind kind,
                           std::optional<ModelParams> init = std::nullopt) {
    slice.validate();
    const int usable = count_usable_quotes(slice);
    const double F = slice.forward, T = slice.time_to_maturity;
    const double DV = slice.discount * slice.volume;

    FitResult out;
    out.n_quotes = usable;

    if (kind == ModelKind::Sln || kind == ModelKind::HexSln) {
        if (usable < 4)
            throw std::invalid_argument("calibrate: SLN needs >= 4 usable quotes, have " +
                                        std::to_string(usable));
        double sb0 = detail::atm_price_guess(slice) * std::sqrt(2.0 * kPi) / (F * DV);
        double q0 = -2.0;
        if (init) {
            if (const auto* p = std::get_if<SlnParams>(&*init)) {
                sb0 = p->sigma_bar;
                q0 = p->q;
            }
        }
        auto unpack = [](const std::vector<double>& u) {
            return SlnParams{std::exp(u[0]), u[1]};
        };
        auto f = [&](const std::vector<double>& u) {
            return detail::penalized_e2(ModelParams{unpack(u)}, slice);
        };
        NmResult r = detail::best_of_restarts(f, {std::log(std::max(sb0, 1e-6)), q0}, {0.2, 0.5});
        SlnParams fitted = unpack(r.x);
        out.objective = r.fmin;
        out.converged = r.converged;
        out.iterations = r.iterations;
        out.params = fitted;

        if (kind == ModelKind::Sln) return out;

        // HEX stage 2: base frozen, fit the two damped tail cubics and a
        if (usable < 12)
            throw std::invalid_argument("calibrate: HEX needs >= 12 usable quotes, have " +
                                        std::to_string(usable));
        HexParams hx;
        hx.base = fitted;
        hx.pi_atm = hex_pi_atm(hx.base, F, T);
        auto unpack_hex = [&](const std::vector<double>& u) {
            HexParams h = hx;
            h.theta_left = {u[0], u[1], u[2]};
            h.theta_right = {u[3], u[4], u[5]};
            h.a = std::exp(u[6]);
            return h;
        };
        auto fh = [&](const std::vector<double>& u) {
            return detail::penalized_e2(ModelParams{unpack_hex(u)}, slice);
        };
        std::vector<double> h0{0, 0, 0, 0, 0, 0, std::log(0.01)};
        NmResult rh = detail::best_of_restarts(fh, h0, {0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.5});
        out.params = unpack_hex(rh.x);
        out.objective = rh.fmin;
        out.converged = out.converged && rh.converged;
        out.iterations += rh.iterations;
        return out;
    }

    // SABR with beta pinned by the kind
    if (usable < 8)
        throw std::invalid_argument("calibrate: SABR needs >= 8 usable quotes, have " +
                                    std::to_string(usable));
    const double beta = (kind == ModelKind::Sabr0) ? 0.0 : 1.0;
    double s0 = detail::atm_price_guess(slice) * std::sqrt(2.0 * kPi) / (F * DV);
    double rho0 = -0.7, nu0 = 1.0;
    if (init) {
        if (const auto* p = std::get_if<SabrParams>(&*init)) {
            s0 = p->sigma1;
            rho0 = p->rho;
            nu0 = p->nu;
        }
    }
    auto unpack = [&](const std::vector<double>& u) {
        return SabrParams{std::exp(u[0]), 0.99 * std::tanh(u[1]), std::exp(u[2]), beta};
    };
    auto f = [&](const std::vector<double>& u) {
        return detail::penalized_e2(ModelParams{unpack(u)}, slice);
    };
    std::vector<double> x0{std::log(std::max(s0, 1e-6)), std::atanh(std::clamp(rho0 / 0.99, -0.999, 0.999)),
                           std::log(std::max(nu0, 1e-6))};
    NmResult r = detail::best_of_restarts(f, x0, {0.2, 0.4, 0.4});
    out.params = unpack(r.x);
    out.objective = r.fmin;
    out.converged = r.converged;
    out.iterations = r.iterations;
    return out;
}

// ------------------------------------------------------- term structure

struct TermStructure {
    ModelKind kind = ModelKind::Sln;
    std::vector<double> maturities;  // years, ascending
    std::vector<FitResult> fits;
    std::vector<Poly> polys;  // one per parameter
    double beta = 1.0;        // carried through for SABR kinds
};

namespace detail {

inline std::vector<double> params_to_vector(ModelKind kind, const ModelParams& m) {
    if (kind == ModelKind::Sln) {
        const auto& p = std::get<SlnParams>(m);
        return {p.sigma_bar, p.q};
    }
    if (kind == ModelKind::Sabr0 || kind == ModelKind::Sabr1) {
        const auto& p = std::get<SabrParams>(m);
        return {p.sigma1, p.rho, p.nu};
    }
    const auto& h = std::get<HexParams>(m);
    const auto& b = std::get<SlnParams>(h.base);
    return {b.sigma_bar,      b.q,
            h.theta_left[0],  h.theta_left[1],  h.theta_left[2],
            h.theta_right[0], h.theta_right[1], h.theta_right[2],
            h.a};
}

}  // namespace detail

inline TermStructure build_term_structure(ModelKind kind,
                                          const std::vector<std::pair<double, FitResult>>& fits,
                                          int degree_cap = 5) {
    if (fits.size() < 2)
        throw std::invalid_argument("build_term_structure: need >= 2 maturities");
    TermStructure ts;
    ts.kind = kind;
    for (const auto& [t, fr] : fits) {
        if (!ts.maturities.empty() && t <= ts.maturities.back())
            throw std::invalid_argument("build_term_structure: maturities must be ascending");
        ts.maturities.push_back(t);
        ts.fits.push_back(fr);
    }
    if (kind == ModelKind::Sabr0 || kind == ModelKind::Sabr1)
        ts.beta = std::get<SabrParams>(fits.front().second.params).beta;

    std::size_t np = detail::params_to_vector(kind, fits.front().second.params).size();
    int degree = std::min<int>(degree_cap, static_cast<int>(fits.size()) - 1);
    for (std::size_t j = 0; j < np; ++j) {
        std::vector<double> ys;
        for (const auto& [t, fr] : fits) ys.push_back(detail::params_to_vector(kind, fr.params)[j]);
        ts.polys.push_back(fit_poly(ts.maturities, ys, degree));
    }
    return ts;
}

struct InterpolatedParams {
    ModelParams params;
    std::vector<std::string> warnings;
};

inline InterpolatedParams interpolate_params(const TermStructure& ts, double target_T,
                                             bool allow_extrapolation = false) {
    if (!allow_extrapolation &&
        (target_T < ts.maturities.front() || target_T > ts.maturities.back()))
        throw std::invalid_argument("interpolate_params: target maturity " +
                                    std::to_string(target_T) + " outside [" +
                                    std::to_string(ts.maturities.front()) + ", " +
                                    std::to_string(ts.maturities.back()) +
                                    "] (pass allow_extrapolation to override)");
    InterpolatedParams out;
    std::vector<double> v;
    for (const auto& p : ts.polys) v.push_back(p.eval(target_T));

    auto clamp_warn = [&](double& x, double lo, double hi, const char* name) {
        if (x < lo || x > hi) {
            out.warnings.push_back(std::string("interpolated ") + name + " = " +
                                   std::to_string(x) + " clamped to [" + std::to_string(lo) +
                                   ", " + std::to_string(hi) + "]");
            x = std::clamp(x, lo, hi);
        }
    };

    if (ts.kind == ModelKind::Sln) {
        clamp_warn(v[0], 1e-8, 10.0, "sigma_bar");
        out.params = SlnParams{v[0], v[1]};
    } else if (ts.kind == ModelKind::Sabr0 || ts.kind == ModelKind::Sabr1) {
        clamp_warn(v[0], 1e-8, 10.0, "sigma1");
        clamp_warn(v[1], -0.99, 0.99, "rho");
        clamp_warn(v[2], 0.0, 100.0, "nu");
        out.params = SabrParams{v[0], v[1], v[2], ts.beta};
    } else {
        clamp_warn(v[0], 1e-8, 10.0, "sigma_bar");
        clamp_warn(v[8], 1e-8, 100.0, "a");
        HexParams h;
        h.base = SlnParams{v[0], v[1]};
        h.theta_left = {v[2], v[3], v[4]};
        h.theta_right = {v[5], v[6], v[7]};
        h.a = v[8];
        h.pi_atm = 0.0;  // re-anchored by the caller once F is known
        out.params = h;
    }
    return out;
}

// pi_atm depends on the pricing context, so it is re-anchored after interpolation
inline void rebind_hex_atm(ModelParams& m, double F, double T) {
    if (auto* h = std::get_if<HexParams>(&m)) h->pi_atm = hex_pi_atm(h->base, F, T);
}

}  // namespace bp
