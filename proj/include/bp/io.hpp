#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bp/calibration.hpp"
#include "bp/market_data.hpp"
#include "bp/model.hpp"
#include "bp/montecarlo.hpp"
#include "bp/products.hpp"

namespace bp {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << content;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_hash(const std::string& path) { return fnv1a64_hex(read_file(path)); }

// ------------------------------------------------------------- model params

inline json model_params_to_json(const ModelParams& m) {
    json j;
    if (const auto* s = std::get_if<SlnParams>(&m)) {
        j["sigma_bar"] = s->sigma_bar;
        j["q"] = s->q;
    } else if (const auto* s2 = std::get_if<SabrParams>(&m)) {
        j["sigma1"] = s2->sigma1;
        j["rho"] = s2->rho;
        j["nu"] = s2->nu;
        j["beta"] = s2->beta;
    } else {
        const auto& h = std::get<HexParams>(m);
        json base;
        if (const auto* bs = std::get_if<SlnParams>(&h.base))
            base["sln"] = {{"sigma_bar", bs->sigma_bar}, {"q", bs->q}};
        else {
            const auto& bb = std::get<SabrParams>(h.base);
            base["sabr"] = {{"sigma1", bb.sigma1}, {"rho", bb.rho}, {"nu", bb.nu}, {"beta", bb.beta}};
        }
        j["base"] = base;
        j["theta_L"] = h.theta_left;
        j["theta_R"] = h.theta_right;
        j["a"] = h.a;
        j["pi_atm"] = h.pi_atm;
    }
    return j;
}

inline ModelParams model_params_from_json(const std::string& kind, const json& j) {
    if (kind == "sln") return SlnParams{j.at("sigma_bar").get<double>(), j.at("q").get<double>()};
    if (kind == "sabr")
        return SabrParams{j.at("sigma1").get<double>(), j.at("rho").get<double>(),
                          j.at("nu").get<double>(), j.at("beta").get<double>()};
    if (kind == "hex") {
        HexParams h;
        const json& b = j.at("base");
        if (b.contains("sln"))
            h.base = SlnParams{b["sln"].at("sigma_bar").get<double>(), b["sln"].at("q").get<double>()};
        else
            h.base = SabrParams{b["sabr"].at("sigma1").get<double>(), b["sabr"].at("rho").get<double>(),
                                b["sabr"].at("nu").get<double>(), b["sabr"].at("beta").get<double>()};
        auto tl = j.at("theta_L").get<std::vector<double>>();
        auto tr = j.at("theta_R").get<std::vector<double>>();
        if (tl.size() != 3 || tr.size() != 3)
            throw std::invalid_argument("hex params: theta_L/theta_R must have 3 entries");
        std::copy(tl.begin(), tl.end(), h.theta_left.begin());
        std::copy(tr.begin(), tr.end(), h.theta_right.begin());
        h.a = j.at("a").get<double>();
        h.pi_atm = j.at("pi_atm").get<double>();
        return h;
    }
    throw std::invalid_argument("unknown model params kind '" + kind + "'");
}

// one document per chain: parameters keyed by model name and maturity (days)
struct ParamsDocument {
    ModelKind kind = ModelKind::Sln;
    // ascending maturity
    std::vector<int> maturity_days;
    std::vector<double> maturity_years;
    std::vector<FitResult> fits;
};

inline std::string params_json_key(ModelKind k) {
    switch (k) {
        case ModelKind::Sln: return "sln";
        case ModelKind::Sabr0:
        case ModelKind::Sabr1: return "sabr";
        case ModelKind::HexSln: return "hex";
    }
    return "?";
}

inline json params_document_to_json(const ParamsDocument& doc) {
    json j;
    j["model"] = model_kind_name(doc.kind);
    json per;
    for (std::size_t i = 0; i < doc.fits.size(); ++i) {
        json e = model_params_to_json(doc.fits[i].params);
        e["t_years"] = doc.maturity_years[i];
        e["objective"] = doc.fits[i].objective;
        e["n_quotes"] = doc.fits[i].n_quotes;
        e["converged"] = doc.fits[i].converged;
        e["iterations"] = doc.fits[i].iterations;
        per[std::to_string(doc.maturity_days[i])] = e;
    }
    j[params_json_key(doc.kind)] = per;
    return j;
}

inline ParamsDocument params_document_from_json(const json& j) {
    ParamsDocument doc;
    doc.kind = model_kind_from_name(j.at("model").get<std::string>());
    std::string key = params_json_key(doc.kind);
    const json& per = j.at(key);
    std::vector<std::pair<int, json>> entries;
    for (auto it = per.begin(); it != per.end(); ++it)
        entries.emplace_back(std::stoi(it.key()), it.value());
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [days, e] : entries) {
        doc.maturity_days.push_back(days);
        doc.maturity_years.push_back(e.contains("t_years") ? e["t_years"].get<double>()
                                                           : days / 365.0);
        FitResult fr;
        fr.params = model_params_from_json(key, e);
        fr.objective = e.value("objective", 0.0);
        fr.n_quotes = e.value("n_quotes", 0);
        fr.converged = e.value("converged", true);
        fr.iterations = e.value("iterations", 0);
        doc.fits.push_back(fr);
    }
    if (doc.fits.empty()) throw std::invalid_argument("params document: no maturities");
    return doc;
}

// ---------------------------------------------------------------- products

inline json product_to_json(const ProductSpec& p) {
    json j;
    j["kind"] = p.kind == ProductKind::BonusCertificate ? "BonusCertificate"
                                                        : "BarrierReverseConvertible";
    j["barrier_style"] = p.barrier_style == BarrierStyle::European ? "European" : "American";
    j["S0"] = p.S0;
    j["B"] = p.B;
    if (p.kind == ProductKind::BonusCertificate) j["K"] = p.K;
    if (p.kind == ProductKind::BarrierReverseConvertible) j["R"] = p.R;
    j["T"] = p.T;
    return j;
}

inline ProductSpec product_from_json(const json& j) {
    ProductSpec p;
    std::string kind = j.at("kind").get<std::string>();
    for (auto& c : kind) c = static_cast<char>(std::tolower(c));
    if (kind == "bonuscertificate" || kind == "bonus_certificate" || kind == "bc")
        p.kind = ProductKind::BonusCertificate;
    else if (kind == "barrierreverseconvertible" || kind == "barrier_reverse_convertible" ||
             kind == "brc")
        p.kind = ProductKind::BarrierReverseConvertible;
    else
        throw std::invalid_argument("product: unknown kind '" + kind + "'");
    std::string style = j.at("barrier_style").get<std::string>();
    for (auto& c : style) c = static_cast<char>(std::tolower(c));
    if (style == "european")
        p.barrier_style = BarrierStyle::European;
    else if (style == "american")
        p.barrier_style = BarrierStyle::American;
    else
        throw std::invalid_argument("product: unknown barrier_style '" + style + "'");
    p.S0 = j.at("S0").get<double>();
    p.B = j.at("B").get<double>();
    p.K = j.value("K", 0.0);
    p.R = j.value("R", 0.0);
    p.T = j.at("T").get<double>();
    p.validate();
    return p;
}

// -------------------------------------------------------------- monte carlo

inline json dynamics_to_json(const DynamicsSpec& d) {
    json j;
    j["T"] = d.T;
    j["steps_per_year"] = d.steps_per_year;
    switch (d.kind) {
        case DynKind::SlnStatic:
            j["kind"] = "sln_static";
            j["sln_static"] = {{"sigma_bar", d.sln_static.sigma_bar}, {"q", d.sln_static.q}};
            break;
        case DynKind::SlnDynamic:
            j["kind"] = "sln_dynamic";
            j["sln_dynamic"] = {{"sigma_A", d.sln_dynamic.sigma_A},
                                {"alpha", d.sln_dynamic.alpha},
                                {"q_B", d.sln_dynamic.q_B},
                                {"beta_exp", d.sln_dynamic.beta_exp}};
            break;
        case DynKind::Sabr:
            j["kind"] = "sabr";
            j["sabr"] = {{"sigma0", d.sabr.sigma0},
                         {"rho", d.sabr.rho},
                         {"nu", d.sabr.nu},
                         {"beta", d.sabr.beta}};
            break;
    }
    return j;
}

inline DynamicsSpec dynamics_from_json(const json& j) {
    DynamicsSpec d;
    std::string kind = j.at("kind").get<std::string>();
    d.T = j.at("T").get<double>();
    d.steps_per_year = j.value("steps_per_year", 250);
    if (kind == "sln_static") {
        d.kind = DynKind::SlnStatic;
        d.sln_static.sigma_bar = j.at("sln_static").at("sigma_bar").get<double>();
        d.sln_static.q = j.at("sln_static").at("q").get<double>();
    } else if (kind == "sln_dynamic") {
        d.kind = DynKind::SlnDynamic;
        const json& s = j.at("sln_dynamic");
        d.sln_dynamic.sigma_A = s.at("sigma_A").get<double>();
        d.sln_dynamic.alpha = s.at("alpha").get<double>();
        d.sln_dynamic.q_B = s.at("q_B").get<double>();
        d.sln_dynamic.beta_exp = s.at("beta_exp").get<double>();
    } else if (kind == "sabr") {
        d.kind = DynKind::Sabr;
        const json& s = j.at("sabr");
        d.sabr.sigma0 = s.at("sigma0").get<double>();
        d.sabr.rho = s.at("rho").get<double>();
        d.sabr.nu = s.at("nu").get<double>();
        d.sabr.beta = s.at("beta").get<double>();
    } else {
        throw std::invalid_argument("dynamics: unknown kind '" + kind + "'");
    }
    d.validate();
    return d;
}

inline json sim_result_to_json(const DynamicsSpec& dyn, const RunConfig& cfg,
                               const SimResult& res) {
    json j;
    j["dynamics"] = dynamics_to_json(dyn);
    j["config"] = {{"n_paths", cfg.n_paths}, {"seed", cfg.seed},
                   {"antithetic", cfg.antithetic}, {"bridge", cfg.bridge},
                   {"barriers", cfg.barrier_fracs}};
    json rows = json::array();
    for (const auto& st : res.stats) {
        rows.push_back({{"barrier_level", st.barrier_frac},
                        {"hits", st.hits},
                        {"ended_below", st.ended_below},
                        {"ended_above", st.ended_above},
                        {"delta", st.delta_hat},
                        {"std_err", st.std_err}});
    }
    j["results"] = rows;
    j["martingale_mean"] = res.mean_x;
    j["martingale_stderr"] = res.stderr_mean_x;
    j["clamp_rate"] = res.clamp_rate;
    j["warnings"] = res.warnings;
    return j;
}

inline std::string sim_result_to_csv(const SimResult& res) {
    std::ostringstream out;
    out << "barrier_level,hits,ended_below,ended_above,delta,std_err\n";
    char buf[256];
    for (const auto& st : res.stats) {
        std::snprintf(buf, sizeof buf, "%.6g,%llu,%llu,%llu,%.10g,%.6g\n", st.barrier_frac,
                      static_cast<unsigned long long>(st.hits),
                      static_cast<unsigned long long>(st.ended_below),
                      static_cast<unsigned long long>(st.ended_above), st.delta_hat, st.std_err);
        out << buf;
    }
    return out.str();
}

inline json price_report_to_json(const PriceReport& r) {
    json j;
    j["price"] = r.price;
    json terms;
    for (const auto& t : r.breakdown) terms[t.name] = t.value;
    j["breakdown"] = terms;
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace bp
