#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bp/products.hpp"
#include "bp/rng.hpp"

namespace bp {

enum class DynKind { SlnStatic, SlnDynamic, Sabr };

// Martingale dynamics on X = S/F, X0 = 1.
//   SlnStatic : dX = s (1 + q (X-1)) dW,          s = sigma_bar / sqrt(T)
//   SlnDynamic: dX = sigma_t (1 + q_t (X-1)) dW,  sigma_t = sigma_A t^alpha,
//               q_t = -|q_B| t^beta_exp (negative-skew sign convention)
//   Sabr      : dX = sigma0 X^beta exp(nu V_t - nu^2 t / 2) (rho dV + sqrt(1-rho^2) dW)
struct DynamicsSpec {
    DynKind kind = DynKind::SlnStatic;
    double T = 1.0;
    int steps_per_year = 250;

    struct {
        double sigma_bar = 0.15;
        double q = 0.0;
    } sln_static;

    struct {
        double sigma_A = 0.15;
        double alpha = 0.0;
        double q_B = 0.0;  // magnitude; the implementation applies q_t = -|q_B| t^beta_exp
        double beta_exp = 0.0;
    } sln_dynamic;

    struct {
        double sigma0 = 0.15;
        double rho = 0.0;
        double nu = 0.0;
        double beta = 0.0;
    } sabr;

    void validate() const {
        if (!(T > 0.0)) throw std::invalid_argument("DynamicsSpec: T must be > 0");
        if (steps_per_year < 1)
            throw std::invalid_argument("DynamicsSpec: steps_per_year must be >= 1");
        switch (kind) {
            case DynKind::SlnStatic:
                if (!(sln_static.sigma_bar > 0.0))
                    throw std::invalid_argument("DynamicsSpec: sigma_bar must be > 0");
                break;
            case DynKind::SlnDynamic:
                if (!(sln_dynamic.sigma_A > 0.0))
                    throw std::invalid_argument("DynamicsSpec: sigma_A must be > 0");
                break;
            case DynKind::Sabr:
                if (!(sabr.sigma0 > 0.0))
                    throw std::invalid_argument("DynamicsSpec: sigma0 must be > 0");
                if (!(sabr.rho >= -1.0 && sabr.rho <= 1.0))
                    throw std::invalid_argument("DynamicsSpec: rho must be in [-1,1]");
                if (!(sabr.nu >= 0.0)) throw std::invalid_argument("DynamicsSpec: nu must be >= 0");
                if (!(sabr.beta >= 0.0 && sabr.beta <= 1.0))
                    throw std::invalid_argument("DynamicsSpec: beta must be in [0,1]");
                break;
        }
    }

    int n_steps() const { return std::max(1, static_cast<int>(std::lround(T * steps_per_year))); }
};

struct RunConfig {
    std::uint64_t n_paths = 100000;
    std::uint64_t seed = 42;
    std::vector<double> barrier_fracs;  // as fractions of S0
    bool antithetic = true;
    bool bridge = true;  // Brownian-bridge crossing marks between monitoring dates
    int threads = 0;     // 0 = hardware concurrency; results do not depend on it
    int n_batches = 100;

    void validate() const {
        if (n_paths == 0) throw std::invalid_argument("RunConfig: n_paths must be > 0");
        if (antithetic && (n_paths % 2) != 0)
            throw std::invalid_argument("RunConfig: antithetic needs an even n_paths");
        if (barrier_fracs.empty())
            throw std::invalid_argument("RunConfig: at least one barrier level required");
        for (double b : barrier_fracs)
            if (!(b > 0.0 && b < 1.0))
                throw std::invalid_argument("RunConfig: barrier fractions must be in (0,1)");
        if (n_batches < 1) throw std::invalid_argument("RunConfig: n_batches must be >= 1");
    }
};

struct BarrierStats {
    std::uint64_t n_paths = 0;
    double barrier_frac = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t ended_below = 0;
    std::uint64_t ended_above = 0;  // hit the barrier, finished above it
    double delta_hat = std::numeric_limits<double>::quiet_NaN();
    double std_err = std::numeric_limits<double>::quiet_NaN();
};

struct SimResult {
    std::vector<BarrierStats> stats;  // ascending barrier level
    double mean_x = 0.0;              // martingale diagnostic, E[X_T] target 1
    double stderr_mean_x = 0.0;
    double clamp_rate = 0.0;
    std::vector<std::string> warnings;
};

namespace mcdetail {

struct StepCoefs {
    std::vector<double> sig;  // per-step effective instantaneous vol
    std::vector<double> q;    // per-step skew (SLN kinds)
};

// For the power-law dynamics the per-step vol uses the exact mean of
// sigma_t^2 over the step, which also sidesteps the t=0 singularity of the
// coefficient grid: skew is evaluated at the right endpoint, first node dt.
inline StepCoefs make_coefs(const DynamicsSpec& dyn) {
    const int n = dyn.n_steps();
    const double dt = dyn.T / n;
    StepCoefs c;
    c.sig.resize(n);
    c.q.resize(n);
    switch (dyn.kind) {
        case DynKind::SlnStatic: {
            double s = dyn.sln_static.sigma_bar / std::sqrt(dyn.T);
            for (int k = 0; k < n; ++k) {
                c.sig[k] = s;
                c.q[k] = dyn.sln_static.q;
            }
            break;
        }
        case DynKind::SlnDynamic: {
            const double sA = dyn.sln_dynamic.sigma_A, al = dyn.sln_dynamic.alpha;
            const double p = 2.0 * al + 1.0;
            for (int k = 0; k < n; ++k) {
                double t0 = k * dt, t1 = (k + 1) * dt;
                double var = sA * sA * (std::pow(t1, p) - std::pow(t0, p)) / p;
                c.sig[k] = std::sqrt(var / dt);
                c.q[k] = -std::fabs(dyn.sln_dynamic.q_B) * std::pow(t1, dyn.sln_dynamic.beta_exp);
            }
            break;
        }
        case DynKind::Sabr: {
            for (int k = 0; k < n; ++k) c.sig[k] = dyn.sabr.sigma0;
            break;
        }
    }
    return c;
}

struct BatchTally {
    std::vector<std::uint64_t> hits, below;  // per barrier (descending order)
    double sum_x = 0.0;
    std::uint64_t clamped_paths = 0;
    std::uint64_t n = 0;
};

// One path per call; everything keyed off (seed, pair/path, step) so draws
// are independent of scheduling.
template <class Observer>
inline void run_paths(const DynamicsSpec& dyn, const RunConfig& cfg,
                      const std::vector<double>& barriers_desc, std::vector<BatchTally>& tallies,
                      Observer&& observe) {
    dyn.validate();
    cfg.validate();
    const int n_steps = dyn.n_steps();
    const double dt = dyn.T / n_steps;
    const double sqdt = std::sqrt(dt);
    const StepCoefs coefs = make_coefs(dyn);
    const std::size_t nb = barriers_desc.size();
    const std::uint64_t n_paths = cfg.n_paths;
    const int n_batches = static_cast<int>(std::min<std::uint64_t>(cfg.n_batches, n_paths));
    const std::uint64_t per_batch = (n_paths + n_batches - 1) / n_batches;

    tallies.assign(n_batches, BatchTally{});
    for (auto& t : tallies) {
        t.hits.assign(nb, 0);
        t.below.assign(nb, 0);
    }

    const bool sabr = dyn.kind == DynKind::Sabr;
    const double rho = dyn.sabr.rho, nu = dyn.sabr.nu, beta = dyn.sabr.beta;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    auto run_batch = [&](int b) {
        BatchTally& tal = tallies[b];
        const std::uint64_t lo = b * per_batch;
        const std::uint64_t hi = std::min<std::uint64_t>(n_paths, lo + per_batch);
        std::vector<std::uint32_t> hitmask_scratch;
        for (std::uint64_t path = lo; path < hi; ++path) {
            const std::uint64_t stream = cfg.antithetic ? path / 2 : path;
            const double sign = (cfg.antithetic && (path & 1)) ? -1.0 : 1.0;
            double X = 1.0;
            double V = 0.0;  // SABR vol driver
            double t = 0.0;
            std::uint32_t hit = 0;
            const std::uint32_t all_hit = (nb >= 32) ? ~0u : ((1u << nb) - 1u);
            bool clamped = false;
            rng::NormalPair zp{0.0, 0.0};
            for (int k = 0; k < n_steps; ++k) {
                double z, zw = 0.0;
                if (sabr) {
                    zp = rng::normal_pair(cfg.seed, stream, static_cast<std::uint64_t>(k) * 2);
                    z = sign * zp.z0;
                    zw = sign * zp.z1;
                } else {
                    if ((k & 1) == 0)
                        zp = rng::normal_pair(cfg.seed, stream, static_cast<std::uint64_t>(k));
                    z = sign * ((k & 1) == 0 ? zp.z0 : zp.z1);
                }
                double lam;
                if (sabr) {
                    double xb = X <= 0.0 ? 0.0 : (beta == 0.0 ? 1.0 : std::pow(X, beta));
                    lam = coefs.sig[k] * xb * std::exp(nu * V - 0.5 * nu * nu * t);
                    V += sqdt * z;  // vol driver uses z; price shock mixes below
                } else {
                    lam = coefs.sig[k] * (1.0 + coefs.q[k] * (X - 1.0));
                    if (lam < 0.0) {  // admissible-region clamp, see DynamicsSpec
                        X = 1.0 - 1.0 / coefs.q[k];
                        lam = 0.0;
                        clamped = true;
                    }
                }
                double shock = sabr ? (rho * z + rho_c * zw) : z;
                double Xn = X + lam * sqdt * shock;
                t += dt;

                if (hit != all_hit) {
                    double u = -1.0;  // lazily drawn, shared across barriers
                    for (std::size_t i = 0; i < nb; ++i) {
                        if (hit & (1u << i)) continue;
                        double bar = barriers_desc[i];
                        double d1 = X - bar, d2 = Xn - bar;
                        if (d1 <= 0.0 || d2 <= 0.0) {
                            hit |= (1u << i);
                            continue;
                        }
                        if (!cfg.bridge || lam <= 0.0) break;  // lower barriers are farther
                        double e = 2.0 * d1 * d2 / (lam * lam * dt);
                        if (e > 40.0) break;  // crossing odds below 4e-18 here and farther down
                        if (u < 0.0)
                            u = rng::uniform(cfg.seed ^ 0x9B97F4A7C15ull, path,
                                             static_cast<std::uint64_t>(k));
                        if (u < std::exp(-e))
                            hit |= (1u << i);
                        else
                            break;
                    }
                }
                X = Xn;
            }
            tal.sum_x += X;
            tal.n += 1;
            if (clamped) tal.clamped_paths += 1;
            for (std::size_t i = 0; i < nb; ++i) {
                if (hit & (1u << i)) {
                    tal.hits[i] += 1;
                    if (X <= barriers_desc[i]) tal.below[i] += 1;
                }
            }
            observe(path, b, X, hit);
        }
    };

    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, n_batches));
    if (n_threads == 1) {
        for (int b = 0; b < n_batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back([&, w] {
                for (int b = w; b < n_batches; b += n_threads) run_batch(b);
            });
        for (auto& th : pool) th.join();
    }
}

inline double batch_delta_stderr(const std::vector<double>& deltas) {
    if (deltas.size() < 10) return std::numeric_limits<double>::quiet_NaN();
    double m = std::accumulate(deltas.begin(), deltas.end(), 0.0) / deltas.size();
    double s2 = 0.0;
    for (double d : deltas) s2 += (d - m) * (d - m);
    s2 /= (deltas.size() - 1);
    return std::sqrt(s2 / deltas.size());
}

}  // namespace mcdetail

inline SimResult simulate(const DynamicsSpec& dyn, const RunConfig& cfg) {
    std::vector<double> desc = cfg.barrier_fracs;
    std::sort(desc.begin(), desc.end(), std::greater<>());
    desc.erase(std::unique(desc.begin(), desc.end()), desc.end());
    if (desc.size() > 32) throw std::invalid_argument("simulate: at most 32 barrier levels");

    std::vector<mcdetail::BatchTally> tallies;
    mcdetail::run_paths(dyn, cfg, desc, tallies, [](std::uint64_t, int, double, std::uint32_t) {});

    SimResult res;
    const std::size_t nb = desc.size();
    std::uint64_t clamped = 0;

    // fixed batch order makes every reduction thread-count independent
    std::vector<double> batch_means;
    double sum_x = 0.0;
    std::uint64_t n_total = 0;
    for (const auto& t : tallies) {
        sum_x += t.sum_x;
        n_total += t.n;
        clamped += t.clamped_paths;
        if (t.n > 0) batch_means.push_back(t.sum_x / t.n);
    }
    res.mean_x = sum_x / n_total;
    if (batch_means.size() > 1) {
        double m = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / batch_means.size();
        double s2 = 0.0;
        for (double v : batch_means) s2 += (v - m) * (v - m);
        s2 /= (batch_means.size() - 1);
        res.stderr_mean_x = std::sqrt(s2 / batch_means.size());
    }
    res.clamp_rate = static_cast<double>(clamped) / n_total;
    if (res.clamp_rate > 1e-3)
        res.warnings.push_back("clamp rate " + std::to_string(res.clamp_rate) +
                               " exceeds 0.1%: paths pressed against the SLN admissible bound");
    if (cfg.n_paths < 10000)
        res.warnings.push_back("n_paths < 1e4: barrier statistics will be noisy");

    for (std::size_t i = nb; i-- > 0;) {  // emit ascending
        BarrierStats st;
        st.n_paths = cfg.n_paths;
        st.barrier_frac = desc[i];
        std::vector<double> batch_deltas;
        for (const auto& t : tallies) {
            st.hits += t.hits[i];
            st.ended_below += t.below[i];
            std::uint64_t ab = t.hits[i] - t.below[i];
            if (t.below[i] > 0)
                batch_deltas.push_back(static_cast<double>(ab) / t.below[i] - 1.0);
        }
        st.ended_above = st.hits - st.ended_below;
        if (st.ended_below > 0) {
            st.delta_hat = static_cast<double>(st.ended_above) / st.ended_below - 1.0;
            st.std_err = mcdetail::batch_delta_stderr(batch_deltas);
            if (!std::isfinite(st.std_err)) {
                // too few usable batches: fall back to the count-based estimate
                double a = static_cast<double>(st.ended_above), b = static_cast<double>(st.ended_below);
                if (a > 0.0)
                    st.std_err = (1.0 + st.delta_hat) * std::sqrt(1.0 / a + 1.0 / b);
            }
        } else {
            res.warnings.push_back("barrier " + std::to_string(desc[i]) +
                                   ": no trajectories ended below, delta undefined");
        }
        res.stats.push_back(st);
    }
    return res;
}

struct DeltaBound {
    double delta = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // 95% on the MC estimate
    double uncertainty = 0.0;          // the delta-uncertainty the bound is quoted for
    double price_impact_bound = 0.0;   // uncertainty / 20
};

inline DeltaBound delta_and_bound(const BarrierStats& st,
                                  std::optional<double> delta_uncertainty = std::nullopt) {
    if (st.ended_below == 0)
        throw std::domain_error("delta_and_bound: ended_below is zero, delta undefined");
    DeltaBound out;
    out.delta = st.delta_hat;
    double se = std::isfinite(st.std_err) ? st.std_err : 0.0;
    out.ci_lo = st.delta_hat - 1.96 * se;
    out.ci_hi = st.delta_hat + 1.96 * se;
    out.uncertainty = delta_uncertainty.value_or(1.96 * se);
    out.price_impact_bound = out.uncertainty / 20.0;
    return out;
}

struct EpsilonEstimate {
    double value = 0.0;    // forward units of S0
    double std_err = 0.0;
    std::uint64_t n_contributing = 0;
};

// Neglected hit-and-recovered mass: for a BC, E[(X_T - K/S0)+ ; hit];
// for a BRC, E[(X_T - (S0+R)/S0)+ ; hit].
inline EpsilonEstimate epsilon_terms(const DynamicsSpec& dyn, RunConfig cfg,
                                     const ProductSpec& spec) {
    spec.validate();
    double level = spec.kind == ProductKind::BonusCertificate ? spec.K / spec.S0
                                                              : (spec.S0 + spec.R) / spec.S0;
    cfg.barrier_fracs = {spec.B / spec.S0};
    int n_batches = static_cast<int>(std::min<std::uint64_t>(cfg.n_batches, cfg.n_paths));
    std::vector<double> batch_sum(n_batches, 0.0);
    std::vector<std::uint64_t> batch_n(n_batches, 0), batch_m(n_batches, 0);
    std::vector<mcdetail::BatchTally> tallies;
    mcdetail::run_paths(dyn, cfg, cfg.barrier_fracs, tallies,
                        [&](std::uint64_t, int b, double x, std::uint32_t hit) {
                            batch_n[b] += 1;
                            if (hit && x > level) {
                                batch_sum[b] += x - level;
                                batch_m[b] += 1;
                            }
                        });
    EpsilonEstimate e;
    double total = 0.0;
    std::uint64_t n = 0;
    std::vector<double> means;
    for (int b = 0; b < n_batches; ++b) {
        total += batch_sum[b];
        n += batch_n[b];
        e.n_contributing += batch_m[b];
        if (batch_n[b] > 0) means.push_back(batch_sum[b] / batch_n[b]);
    }
    e.value = total / n;
    if (means.size() > 1) {
        double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
        double s2 = 0.0;
        for (double v : means) s2 += (v - m) * (v - m);
        e.std_err = std::sqrt(s2 / (means.size() - 1) / means.size());
    }
    return e;
}

struct ConditionalDensities {
    std::vector<double> edges;            // n_bins + 1
    std::vector<std::uint64_t> bn, bh;    // barrier-not-hit / barrier-hit counts
    std::uint64_t hits = 0;
    double hit_mean = 0.0;                // E[X_T | hit]; martingale identity target: barrier
    double hit_mean_stderr = 0.0;
};

inline ConditionalDensities conditional_densities(const DynamicsSpec& dyn, RunConfig cfg,
                                                  double barrier_frac, int n_bins = 120,
                                                  double x_lo = 0.0, double x_hi = 3.0) {
    cfg.barrier_fracs = {barrier_frac};
    ConditionalDensities cd;
    cd.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) cd.edges[i] = x_lo + (x_hi - x_lo) * i / n_bins;
    cd.bn.assign(n_bins, 0);
    cd.bh.assign(n_bins, 0);
    int n_batches = static_cast<int>(std::min<std::uint64_t>(cfg.n_batches, cfg.n_paths));
    std::vector<std::vector<std::uint64_t>> bn_b(n_batches, std::vector<std::uint64_t>(n_bins, 0));
    std::vector<std::vector<std::uint64_t>> bh_b(n_batches, std::vector<std::uint64_t>(n_bins, 0));
    std::vector<double> hsum(n_batches, 0.0), hsum2(n_batches, 0.0);
    std::vector<std::uint64_t> hn(n_batches, 0);
    std::vector<mcdetail::BatchTally> tallies;
    mcdetail::run_paths(dyn, cfg, cfg.barrier_fracs, tallies,
                        [&](std::uint64_t, int b, double x, std::uint32_t hit) {
                            int bin = static_cast<int>((x - x_lo) / (x_hi - x_lo) * n_bins);
                            bin = std::clamp(bin, 0, n_bins - 1);
                            if (hit) {
                                bh_b[b][bin] += 1;
                                hsum[b] += x;
                                hsum2[b] += x * x;
                                hn[b] += 1;
                            } else {
                                bn_b[b][bin] += 1;
                            }
                        });
    double hs = 0.0, hs2 = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        for (int i = 0; i < n_bins; ++i) {
            cd.bn[i] += bn_b[b][i];
            cd.bh[i] += bh_b[b][i];
        }
        hs += hsum[b];
        hs2 += hsum2[b];
        cd.hits += hn[b];
    }
    if (cd.hits > 1) {
        cd.hit_mean = hs / cd.hits;
        double var = (hs2 - hs * hs / cd.hits) / (cd.hits - 1);
        cd.hit_mean_stderr = std::sqrt(std::max(0.0, var) / cd.hits);
    }
    return cd;
}

}  // namespace bp
