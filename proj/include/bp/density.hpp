#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bp/math.hpp"
#include "bp/model.hpp"

namespace bp {

// Terminal risk-neutral density on a strike grid. pdf is read between nodes
// as piecewise linear; cdf is its running trapezoid integral.
struct Density {
    std::vector<double> grid;  // ascending strikes
    std::vector<double> pdf;
    std::vector<double> cdf;

    double mass() const { return cdf.empty() ? 0.0 : cdf.back(); }

    double mean() const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            s += 0.5 * (grid[i] * pdf[i] + grid[i - 1] * pdf[i - 1]) * (grid[i] - grid[i - 1]);
        return s;
    }

    double pdf_at(double x) const {
        if (grid.empty() || x <= grid.front() || x >= grid.back()) {
            if (!grid.empty() && (x == grid.front() || x == grid.back()))
                return x == grid.front() ? pdf.front() : pdf.back();
            return 0.0;
        }
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        std::size_t i = static_cast<std::size_t>(it - grid.begin());
        double w = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
        return pdf[i - 1] + w * (pdf[i] - pdf[i - 1]);
    }

    double cdf_at(double x) const {
        if (grid.empty() || x <= grid.front()) return 0.0;
        if (x >= grid.back()) return cdf.back();
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        std::size_t i = static_cast<std::size_t>(it - grid.begin());
        double p = pdf_at(x);
        return cdf[i - 1] + 0.5 * (p + pdf[i - 1]) * (x - grid[i - 1]);
    }

    // integral of (phi - K)+ pdf; the kink is handled as an exact node
    double call_moment(double K) const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            double a = grid[i - 1], b = grid[i];
            if (b <= K) continue;
            double pa = pdf[i - 1], pb = pdf[i];
            if (a < K) {
                double w = (K - a) / (b - a);
                pa = pa + w * (pb - pa);
                a = K;
            }
            s += 0.5 * ((a - K) * pa + (b - K) * pb) * (b - a);
        }
        return s;
    }

    // integral of (B - phi)+ pdf
    double put_moment(double B) const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            double a = grid[i - 1], b = grid[i];
            if (a >= B) break;
            double pa = pdf[i - 1], pb = pdf[i];
            if (b > B) {
                double w = (B - a) / (b - a);
                pb = pa + w * (pb - pa);
                b = B;
            }
            s += 0.5 * ((B - a) * pa + (B - b) * pb) * (b - a);
        }
        return s;
    }

    // copy with extra nodes inserted (pdf linearly interpolated, cdf rebuilt)
    Density with_knots(std::vector<double> knots) const {
        Density d;
        d.grid = grid;
        d.pdf = pdf;
        for (double k : knots) {
            if (k <= d.grid.front() || k >= d.grid.back()) continue;
            auto it = std::lower_bound(d.grid.begin(), d.grid.end(), k);
            if (*it == k) continue;
            std::size_t i = static_cast<std::size_t>(it - d.grid.begin());
            double w = (k - d.grid[i - 1]) / (d.grid[i] - d.grid[i - 1]);
            double pk = d.pdf[i - 1] + w * (d.pdf[i] - d.pdf[i - 1]);
            d.grid.insert(d.grid.begin() + i, k);
            d.pdf.insert(d.pdf.begin() + i, pk);
        }
        d.cdf = cum_trapezoid(d.grid, d.pdf);
        return d;
    }
};

// Grid request. Non-finite lo/hi are resolved from model quantiles at
// tail_mass / 1 - tail_mass, intersected with the model's strike domain.
struct GridSpec {
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    int n = 2001;
    double tail_mass = 1e-7;
};

namespace detail {

// largest step down / up from F at which the model cdf stays evaluable
inline double safe_eval_bound(const ModelParams& m, double F, double T, bool lower) {
    double good = F;
    double step = 0.25 * F;
    for (int i = 0; i < 200; ++i) {
        double cand = lower ? good - step : good + step;
        bool ok = true;
        try {
            (void)model_cdf(m, F, cand, T);
            (void)model_cdf(m, F, lower ? cand - 2e-4 * F : cand + 2e-4 * F, T);
        } catch (const std::domain_error&) {
            ok = false;
        }
        if (ok) {
            good = cand;
            step *= 2.0;
            if (std::fabs(good) > 1e6 * F) break;
        } else {
            step *= 0.5;
            if (step < 1e-9 * F) break;
        }
    }
    return good;
}

inline double quantile_by_bisection(const ModelParams& m, double F, double T, double u,
                                    double lo, double hi) {
    double flo = model_cdf(m, F, lo, T), fhi = model_cdf(m, F, hi, T);
    if (flo >= u) return lo;
    if (fhi <= u) return hi;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * F; ++i) {
        double mid = 0.5 * (lo + hi);
        if (model_cdf(m, F, mid, T) < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline double model_quantile(const ModelParams& m, double F, double T, double u) {
    if (const auto* sln = std::get_if<SlnParams>(&m)) return sln_quantile(*sln, F, u);
    double lo = detail::safe_eval_bound(m, F, T, true);
    double hi = detail::safe_eval_bound(m, F, T, false);
    return detail::quantile_by_bisection(m, F, T, u, lo, hi);
}

// Breeden-Litzenberger on the model's interpolated prices: second central
// differences of puts below the forward and calls above it, h = 1e-4*F.
inline Density density_from_model(const ModelParams& m, double F, double T, GridSpec spec = {}) {
    model_validate(m);
    const double h = 1e-4 * F;
    double lo = spec.lo, hi = spec.hi;
    if (!std::isfinite(lo)) lo = model_quantile(m, F, T, spec.tail_mass);
    if (!std::isfinite(hi)) hi = model_quantile(m, F, T, 1.0 - spec.tail_mass);
    // keep the finite-difference stencil inside the evaluable domain
    double dom_lo = detail::safe_eval_bound(m, F, T, true);
    double dom_hi = detail::safe_eval_bound(m, F, T, false);
    lo = std::max(lo, dom_lo + 2.0 * h);
    hi = std::min(hi, dom_hi - 2.0 * h);
    if (!(lo < hi)) throw std::domain_error("density_from_model: empty strike domain");
    if (spec.n < 11) throw std::invalid_argument("density_from_model: grid too coarse");

    Density d;
    d.grid.resize(spec.n);
    d.pdf.resize(spec.n);
    double dx = (hi - lo) / (spec.n - 1);
    for (int i = 0; i < spec.n; ++i) d.grid[i] = lo + i * dx;
    d.grid.back() = hi;

    double worst = 0.0, worst_at = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        double K = d.grid[i];
        double p;
        if (K <= F)
            p = (model_put(m, F, K - h, T) - 2.0 * model_put(m, F, K, T) +
                 model_put(m, F, K + h, T)) /
                (h * h);
        else
            p = (model_call(m, F, K - h, T) - 2.0 * model_call(m, F, K, T) +
                 model_call(m, F, K + h, T)) /
                (h * h);
        if (p < worst) {
            worst = p;
            worst_at = K;
        }
        d.pdf[i] = p;
    }
    if (worst < -1e-8)
        throw std::domain_error("density_from_model: negative density " + std::to_string(worst) +
                                " near strike " + std::to_string(worst_at));
    for (double& p : d.pdf) p = std::max(p, 0.0);
    d.cdf = cum_trapezoid(d.grid, d.pdf);

    double mass = d.mass();
    if (std::fabs(mass - 1.0) > 1e-4)
        throw std::domain_error("density_from_model: mass " + std::to_string(mass) +
                                " outside 1 +/- 1e-4 on grid [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    double mu = d.mean();
    if (std::fabs(mu - F) > 1e-4 * F)
        throw std::domain_error("density_from_model: grid mean " + std::to_string(mu) +
                                " deviates from forward " + std::to_string(F));
    return d;
}

}  // namespace bp
