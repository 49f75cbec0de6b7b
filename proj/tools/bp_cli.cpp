// Command-line front end: ingestion -> calibration -> density -> pricing -> MC.
// Exit codes: 0 ok, 1 domain error, 2 usage / IO error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bp/density.hpp"
#include "bp/io.hpp"
#include "bp/market_data.hpp"
#include "bp/montecarlo.hpp"

namespace {

std::string join_path(const std::string& dir, const std::string& path) {
    if (dir.empty() || path.empty() || path.front() == '/') return path;
    return dir.back() == '/' ? dir + path : dir + "/" + path;
}

bp::TermStructure term_structure_from_doc(const bp::ParamsDocument& doc) {
    std::vector<std::pair<double, bp::FitResult>> fits;
    for (std::size_t i = 0; i < doc.fits.size(); ++i)
        fits.emplace_back(doc.maturity_years[i], doc.fits[i]);
    return bp::build_term_structure(doc.kind, fits);
}

// params at an arbitrary maturity: exact slice if present, else the
// term-structure polynomial
bp::ModelParams params_at(const bp::ParamsDocument& doc, double T, double F,
                          std::vector<std::string>* warnings) {
    for (std::size_t i = 0; i < doc.maturity_years.size(); ++i)
        if (std::fabs(doc.maturity_years[i] - T) < 1e-12) {
            bp::ModelParams m = doc.fits[i].params;
            bp::rebind_hex_atm(m, F, T);
            return m;
        }
    if (doc.fits.size() == 1)
        throw std::invalid_argument("params file has a single maturity " +
                                    std::to_string(doc.maturity_years[0]) +
                                    " != requested " + std::to_string(T));
    auto ts = term_structure_from_doc(doc);
    auto ip = bp::interpolate_params(ts, T);
    if (warnings)
        warnings->insert(warnings->end(), ip.warnings.begin(), ip.warnings.end());
    bp::rebind_hex_atm(ip.params, F, T);
    return ip.params;
}

double atm_sigma_1y(const bp::ParamsDocument& doc, double F) {
    double T = 1.0;
    if (doc.maturity_years.size() > 1) {
        T = std::clamp(1.0, doc.maturity_years.front(), doc.maturity_years.back());
    } else {
        T = doc.maturity_years.front();
    }
    bp::ModelParams m = params_at(doc, T, F, nullptr);
    // ATM price -> normal vol, then rescale to one year
    double atm = bp::model_call(m, F, F, T);
    double sigma_T = atm * std::sqrt(2.0 * bp::kPi) / F;
    return sigma_T / std::sqrt(T);
}

int run_calibrate(const std::string& chain_path, const std::string& model_name,
                  const std::string& out_path, const std::string& report_path, double spot,
                  const std::string& pricing_date) {
    bp::ChainConfig cfg;
    cfg.spot = spot;
    if (!pricing_date.empty()) cfg.pricing_date = bp::Date::parse(pricing_date);
    bp::Surface surf = bp::load_chain(chain_path, cfg);
    bp::ModelKind kind = bp::model_kind_from_name(model_name);

    bp::ParamsDocument doc;
    doc.kind = kind;
    std::ostringstream report;
    report << "maturity_days,t_years,objective,n_quotes,converged,iterations\n";
    for (const auto& slice : surf.slices) {
        bp::FitResult fr = bp::calibrate(slice, kind);
        int days = static_cast<int>(slice.maturity_date.serial() - slice.pricing_date.serial());
        doc.maturity_days.push_back(days);
        doc.maturity_years.push_back(slice.time_to_maturity);
        doc.fits.push_back(fr);
        char line[256];
        std::snprintf(line, sizeof line, "%d,%.10g,%.6e,%d,%s,%d\n", days,
                      slice.time_to_maturity, fr.objective, fr.n_quotes,
                      fr.converged ? "true" : "false", fr.iterations);
        report << line;
        if (!fr.converged)
            std::cerr << "warning: maturity " << days << "d did not converge (E2 = "
                      << fr.objective << ")\n";
    }
    bp::json j = bp::params_document_to_json(doc);
    j["provenance"] = {{"chain", bp::file_hash(chain_path)}};
    bp::write_file(out_path, j.dump(2) + "\n");
    if (!report_path.empty()) bp::write_file(report_path, report.str());
    std::cout << "calibrated " << doc.fits.size() << " maturities -> " << out_path << "\n";
    return 0;
}

int run_density(const std::string& params_path, double t_years, int days, double forward,
                const std::string& grid_arg, const std::string& out_path) {
    auto doc = bp::params_document_from_json(bp::json::parse(bp::read_file(params_path)));
    double T = days > 0 ? days / 365.0 : t_years;
    if (!(T > 0.0)) throw std::invalid_argument("density: give --t or --days");
    bp::ModelParams m = params_at(doc, T, forward, nullptr);
    bp::GridSpec spec;
    if (!grid_arg.empty()) {
        double lo, hi;
        int n;
        if (std::sscanf(grid_arg.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3)
            throw std::invalid_argument("density: --grid wants lo:hi:n");
        spec.lo = lo;
        spec.hi = hi;
        spec.n = n;
    }
    bp::Density d = bp::density_from_model(m, forward, T, spec);
    std::ostringstream out;
    out << "strike,pdf,cdf\n";
    char buf[128];
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", d.grid[i], d.pdf[i], d.cdf[i]);
        out << buf;
    }
    bp::write_file(out_path, out.str());
    std::cout << "density on [" << d.grid.front() << ", " << d.grid.back() << "] ("
              << d.grid.size() << " pts, mass " << d.mass() << ") -> " << out_path << "\n";
    return 0;
}

int run_price(const std::string& product_path, const std::string& params_path,
              std::optional<double> delta_flag, const std::string& mc_path,
              std::optional<double> epsilon_flag, std::optional<double> sigma_atm_flag,
              double discount, double volume, const std::string& out_path) {
    bp::ProductSpec spec = bp::product_from_json(bp::json::parse(bp::read_file(product_path)));
    auto doc = bp::params_document_from_json(bp::json::parse(bp::read_file(params_path)));
    double F = spec.S0;  // forward-at-maturity convention F = S0
    std::vector<std::string> warnings;
    bp::ModelParams model = params_at(doc, spec.T, F, &warnings);

    bp::PricingContext ctx{F, discount, volume};
    std::optional<double> delta = delta_flag;
    std::optional<double> epsilon = epsilon_flag;
    bp::json mc_meta;
    if (!mc_path.empty()) {
        bp::json mc = bp::json::parse(bp::read_file(mc_path));
        double want = spec.B / spec.S0;
        bool found = false;
        for (const auto& row : mc.at("results")) {
            if (std::fabs(row.at("barrier_level").get<double>() - want) < 1e-9) {
                delta = row.at("delta").get<double>();
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("price: mc file has no barrier level " +
                                        std::to_string(want));
        if (!epsilon && mc.contains("epsilon"))
            epsilon = mc["epsilon"].at("value").get<double>() * spec.S0;
        mc_meta["mc"] = bp::file_hash(mc_path);
    }

    bp::PriceReport report;
    if (spec.barrier_style == bp::BarrierStyle::European) {
        bp::Density dens = bp::density_from_model(model, F, spec.T);
        report = spec.kind == bp::ProductKind::BonusCertificate ? bp::price_ebc(spec, dens, ctx)
                                                                : bp::price_ebrc(spec, dens, ctx);
    } else {
        if (!delta)
            throw std::invalid_argument(
                "price: American style needs --delta or --delta-from-mc");
        bp::PricingInputs in;
        in.ctx = ctx;
        in.delta = *delta;
        in.p_h_minus = bp::model_cdf(model, F, spec.B, spec.T);
        in.call_K = spec.kind == bp::ProductKind::BonusCertificate
                        ? bp::model_call(model, F, spec.K, spec.T)
                        : 0.0;
        in.put_B = bp::model_put(model, F, spec.B, spec.T);
        in.epsilon = epsilon;
        report = spec.kind == bp::ProductKind::BonusCertificate ? bp::price_abc(spec, in)
                                                                : bp::price_abrc(spec, in);
    }

    double sigma1y = sigma_atm_flag ? *sigma_atm_flag : atm_sigma_1y(doc, F);
    bp::SeparationCheck sep = bp::validate_separation(spec, sigma1y);
    if (!sep.pass) report.warnings.push_back(sep.message());
    report.warnings.insert(report.warnings.end(), warnings.begin(), warnings.end());

    bp::json j = bp::price_report_to_json(report);
    j["product"] = bp::product_to_json(spec);
    j["model"] = bp::model_kind_name(doc.kind);
    j["separation"] = {{"pass", sep.pass}, {"lhs", sep.lhs}, {"rhs", sep.rhs}};
    j["inputs"] = {{"forward", F}, {"discount", discount}, {"volume", volume}};
    if (delta) j["inputs"]["delta"] = *delta;
    j["provenance"] = {{"product", bp::file_hash(product_path)},
                       {"params", bp::file_hash(params_path)}};
    if (!mc_meta.empty()) j["provenance"].update(mc_meta);
    std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) bp::write_file(out_path, text);
    std::cout << text;
    return 0;
}

int run_simulate(const std::string& dyn_path, std::uint64_t paths, std::uint64_t seed,
                 const std::string& barriers_arg, int steps_per_year, bool bridge,
                 bool antithetic, int threads, const std::string& out_path,
                 const std::string& table_path, const std::string& product_path) {
    bp::DynamicsSpec dyn = bp::dynamics_from_json(bp::json::parse(bp::read_file(dyn_path)));
    if (steps_per_year > 0) dyn.steps_per_year = steps_per_year;
    bp::RunConfig cfg;
    cfg.n_paths = paths;
    cfg.seed = seed;
    cfg.bridge = bridge;
    cfg.antithetic = antithetic;
    cfg.threads = threads;
    std::stringstream ss(barriers_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.barrier_fracs.push_back(std::stod(tok));

    bp::SimResult res = bp::simulate(dyn, cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";

    bp::json j = bp::sim_result_to_json(dyn, cfg, res);
    if (!product_path.empty()) {
        bp::ProductSpec spec =
            bp::product_from_json(bp::json::parse(bp::read_file(product_path)));
        bp::EpsilonEstimate eps = bp::epsilon_terms(dyn, cfg, spec);
        j["epsilon"] = {{"value", eps.value},
                        {"std_err", eps.std_err},
                        {"n_contributing", eps.n_contributing},
                        {"kind", spec.kind == bp::ProductKind::BonusCertificate ? "eps_bc"
                                                                                : "eps_rc"}};
    }
    bp::write_file(out_path, j.dump(2) + "\n");
    if (!table_path.empty()) bp::write_file(table_path, bp::sim_result_to_csv(res));
    std::cout << "simulated " << paths << " paths, " << dyn.n_steps() << " steps -> " << out_path
              << "\n";
    for (const auto& st : res.stats) {
        char line[160];
        std::snprintf(line, sizeof line, "  barrier %.0f%%: hits %llu below %llu above %llu delta %.4f (se %.4f)\n",
                      100.0 * st.barrier_frac, static_cast<unsigned long long>(st.hits),
                      static_cast<unsigned long long>(st.ended_below),
                      static_cast<unsigned long long>(st.ended_above), st.delta_hat, st.std_err);
        std::cout << line;
    }
    return 0;
}

int run_report(const std::string& in_path, const std::string& format) {
    bp::json j = bp::json::parse(bp::read_file(in_path));
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (j.contains("results")) {
        if (format == "csv") {
            std::cout << "barrier_level,hits,ended_below,ended_above,delta,std_err\n";
            for (const auto& r : j["results"]) {
                std::printf("%.6g,%llu,%llu,%llu,%.10g,%.6g\n",
                            r.at("barrier_level").get<double>(),
                            r.at("hits").get<unsigned long long>(),
                            r.at("ended_below").get<unsigned long long>(),
                            r.at("ended_above").get<unsigned long long>(),
                            r.at("delta").get<double>(), r.at("std_err").get<double>());
            }
            return 0;
        }
        std::cout << "simulation: " << j["config"]["n_paths"] << " paths, seed "
                  << j["config"]["seed"] << ", martingale mean " << j["martingale_mean"] << "\n";
        for (const auto& r : j["results"])
            std::cout << "  barrier " << r["barrier_level"] << ": delta " << r["delta"]
                      << " (hits " << r["hits"] << ")\n";
        return 0;
    }
    if (j.contains("price")) {
        std::cout << "price: " << j["price"].get<double>() << "\n";
        for (auto it = j["breakdown"].begin(); it != j["breakdown"].end(); ++it)
            std::cout << "  " << it.key() << ": " << it.value().get<double>() << "\n";
        for (const auto& w : j["warnings"]) std::cout << "  warning: " << w.get<std::string>() << "\n";
        return 0;
    }
    throw std::invalid_argument("report: unrecognized document " + in_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"barrier products pricing engine"};
    app.require_subcommand(1);
    std::string out_dir;
    app.add_option("--out-dir", out_dir, "directory prefix for output files");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit model parameters per maturity");
    std::string chain, model = "sln", params_out = "params.json", fit_report;
    double spot = std::numeric_limits<double>::quiet_NaN();
    std::string pricing_date;
    cal->add_option("--chain", chain, "option chain CSV")->required();
    cal->add_option("--model", model, "sln|sabr0|sabr1|hex");
    cal->add_option("--out", params_out, "output params.json");
    cal->add_option("--report", fit_report, "per-maturity fit report CSV");
    cal->add_option("--spot", spot, "spot, used as forward when the file has none");
    cal->add_option("--pricing-date", pricing_date, "YYYY-MM-DD");

    // density
    auto* den = app.add_subcommand("density", "emit pdf/cdf grid for one maturity");
    std::string den_params, den_out = "density.csv", den_grid;
    double den_t = 0.0, den_fwd = 1.0;
    int den_days = 0;
    den->add_option("--params", den_params, "params.json")->required();
    den->add_option("--t", den_t, "maturity in years");
    den->add_option("--days", den_days, "maturity in days (ACT/365)");
    den->add_option("--forward", den_fwd, "forward level");
    den->add_option("--grid", den_grid, "lo:hi:n (default: auto bounds, 2001 pts)");
    den->add_option("--out", den_out, "output CSV");

    // price
    auto* pr = app.add_subcommand("price", "price a product from fitted params");
    std::string pr_product, pr_params, pr_mc, pr_out;
    double pr_delta = std::numeric_limits<double>::quiet_NaN();
    double pr_eps = std::numeric_limits<double>::quiet_NaN();
    double pr_sigma = std::numeric_limits<double>::quiet_NaN();
    double pr_discount = 1.0, pr_volume = 1.0;
    pr->add_option("--product", pr_product, "product JSON")->required();
    pr->add_option("--params", pr_params, "params.json")->required();
    pr->add_option("--delta", pr_delta, "delta parameter (American style)");
    pr->add_option("--delta-from-mc", pr_mc, "mc.json with the product's barrier level");
    pr->add_option("--epsilon", pr_eps, "tail-correction estimate, price units");
    pr->add_option("--sigma-atm-1y", pr_sigma, "1y ATM vol for the separation check");
    pr->add_option("--discount", pr_discount, "discount factor D");
    pr->add_option("--volume", pr_volume, "volume factor V");
    pr->add_option("--out", pr_out, "write the report JSON here as well");

    // simulate
    auto* sim = app.add_subcommand("simulate", "barrier-hit Monte Carlo");
    std::string sim_dyn, sim_out = "mc.json", sim_table, sim_product;
    std::string sim_barriers = "0.60,0.65,0.70,0.75,0.80,0.90";
    std::uint64_t sim_paths = 1000000, sim_seed = 42;
    int sim_spy = 0, sim_threads = 0;
    bool sim_bridge = true, sim_anti = true;
    sim->add_option("--dynamics", sim_dyn, "dynamics JSON")->required();
    sim->add_option("--paths", sim_paths, "number of paths");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--barriers", sim_barriers, "comma list of barrier fractions");
    sim->add_option("--steps-per-year", sim_spy, "override steps per year");
    sim->add_flag("--bridge,!--no-bridge", sim_bridge,
                  "Brownian-bridge crossing correction (default on)");
    sim->add_flag("--antithetic,!--no-antithetic", sim_anti, "antithetic pairs (default on)");
    sim->add_option("--threads", sim_threads, "worker threads (0 = auto; result identical)");
    sim->add_option("--out", sim_out, "output mc.json");
    sim->add_option("--table", sim_table, "hit-count table CSV");
    sim->add_option("--product", sim_product, "product JSON: also estimate the epsilon term");

    // report
    auto* rep = app.add_subcommand("report", "summarize a result document");
    std::string rep_in, rep_fmt = "text";
    rep->add_option("--in", rep_in, "mc.json or price report JSON")->required();
    rep->add_option("--format", rep_fmt, "text|json|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (*cal)
            return run_calibrate(chain, model, join_path(out_dir, params_out),
                                 fit_report.empty() ? "" : join_path(out_dir, fit_report), spot,
                                 pricing_date);
        if (*den)
            return run_density(den_params, den_t, den_days, den_fwd, den_grid,
                               join_path(out_dir, den_out));
        if (*pr)
            return run_price(pr_product, pr_params,
                             std::isnan(pr_delta) ? std::nullopt : std::optional<double>(pr_delta),
                             pr_mc,
                             std::isnan(pr_eps) ? std::nullopt : std::optional<double>(pr_eps),
                             std::isnan(pr_sigma) ? std::nullopt : std::optional<double>(pr_sigma),
                             pr_discount, pr_volume,
                             pr_out.empty() ? "" : join_path(out_dir, pr_out));
        if (*sim)
            return run_simulate(sim_dyn, sim_paths, sim_seed, sim_barriers, sim_spy, sim_bridge,
                                sim_anti, sim_threads, join_path(out_dir, sim_out),
                                sim_table.empty() ? "" : join_path(out_dir, sim_table),
                                sim_product);
        if (*rep) return run_report(rep_in, rep_fmt);
    } catch (const std::invalid_argument& e) {
        std::cerr << bp::json{{"error", e.what()}, {"type", "usage"}}.dump() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << bp::json{{"error", e.what()}, {"type", "domain"}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << bp::json{{"error", e.what()}, {"type", "internal"}}.dump() << "\n";
        return 1;
    }
    return 2;
}
