#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bp {

// minimal civil date, enough for day arithmetic and ISO round-trips
struct Date {
    int y = 1970, m = 1, d = 1;

    // days since 1970-01-01 (Howard Hinnant's civil algorithm)
    long serial() const {
        int yy = y - (m <= 2);
        long era = (yy >= 0 ? yy : yy - 399) / 400;
        unsigned yoe = static_cast<unsigned>(yy - era * 400);
        unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
        unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<long>(doe) - 719468;
    }

    static Date from_serial(long z) {
        z += 719468;
        long era = (z >= 0 ? z : z - 146096) / 146097;
        unsigned doe = static_cast<unsigned>(z - era * 146097);
        unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        long yy = static_cast<long>(yoe) + era * 400;
        unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        unsigned mp = (5 * doy + 2) / 153;
        unsigned dd = doy - (153 * mp + 2) / 5 + 1;
        unsigned mm = mp + (mp < 10 ? 3 : -9);
        return Date{static_cast<int>(yy + (mm <= 2)), static_cast<int>(mm), static_cast<int>(dd)};
    }

    Date plus_days(int n) const { return from_serial(serial() + n); }

    static Date parse(const std::string& iso) {
        Date out;
        char dash1, dash2;
        std::istringstream ss(iso);
        if (!(ss >> out.y >> dash1 >> out.m >> dash2 >> out.d) || dash1 != '-' || dash2 != '-' ||
            out.m < 1 || out.m > 12 || out.d < 1 || out.d > 31)
            throw std::invalid_argument("Date: expected YYYY-MM-DD, got '" + iso + "'");
        return out;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    friend bool operator<(const Date& a, const Date& b) { return a.serial() < b.serial(); }
    friend bool operator==(const Date& a, const Date& b) {
        return a.y == b.y && a.m == b.m && a.d == b.d;
    }
};

struct OptionQuote {
    double strike = 0.0;
    std::optional<double> call_price;
    std::optional<double> put_price;
};

struct MarketSlice {
    Date pricing_date;
    Date maturity_date;
    double time_to_maturity = 0.0;  // ACT/365
    double forward = 0.0;
    double discount = 1.0;
    double volume = 1.0;
    std::vector<OptionQuote> quotes;  // strictly ascending strikes

    void validate() const {
        if (!(maturity_date.serial() > pricing_date.serial()))
            throw std::invalid_argument("MarketSlice: maturity_date must be after pricing_date");
        if (!(forward > 0.0)) throw std::invalid_argument("MarketSlice: forward must be > 0");
        if (!(discount > 0.0 && discount <= 1.0))
            throw std::invalid_argument("MarketSlice: discount must be in (0,1]");
        double prev = -1.0;
        for (const auto& q : quotes) {
            if (!(q.strike > 0.0)) throw std::invalid_argument("MarketSlice: strike must be > 0");
            if (q.strike <= prev)
                throw std::invalid_argument("MarketSlice: strikes not strictly ascending at " +
                                            std::to_string(q.strike));
            prev = q.strike;
            for (const auto& px : {q.call_price, q.put_price})
                if (px && (!(*px >= 0.0) || !std::isfinite(*px)))
                    throw std::invalid_argument("MarketSlice: negative or non-finite price at strike " +
                                                std::to_string(q.strike));
        }
    }
};

inline double moneyness(const MarketSlice& s, double strike) {
    return (strike - s.forward) / s.forward;
}

struct Surface {
    std::vector<MarketSlice> slices;  // ascending maturity

    void validate() const {
        long prev = -1;
        for (const auto& s : slices) {
            s.validate();
            if (!slices.empty() && !(s.pricing_date == slices.front().pricing_date))
                throw std::invalid_argument("Surface: slices must share the pricing date");
            if (s.maturity_date.serial() <= prev)
                throw std::invalid_argument("Surface: slices must be strictly ascending in maturity");
            prev = s.maturity_date.serial();
        }
    }
};

struct ChainConfig {
    Date pricing_date{2015, 1, 1};
    double spot = std::numeric_limits<double>::quiet_NaN();  // fallback forward
    double volume = 1.0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<double> parse_cell(const std::string& cell, int row, const char* what) {
    if (cell.empty()) return std::nullopt;
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("load_chain: row " + std::to_string(row) + ": bad " + what +
                                    " '" + cell + "'");
    }
}

}  // namespace detail

inline constexpr const char* kChainHeader =
    "maturity_days,strike,call_price,put_price,forward,discount";

// CSV schema: maturity_days,strike,call_price,put_price,forward,discount
// (empty cell = absent). One file per pricing date.
inline Surface load_chain(const std::string& path, const ChainConfig& cfg = {}) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_chain: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_chain: empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kChainHeader)
        throw std::invalid_argument("load_chain: bad header, expected '" +
                                    std::string(kChainHeader) + "'");

    struct Group {
        std::optional<double> forward, discount;
        std::vector<OptionQuote> quotes;
    };
    std::map<int, Group> groups;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != 6)
            throw std::invalid_argument("load_chain: row " + std::to_string(row) +
                                        ": expected 6 columns, got " + std::to_string(cells.size()));
        auto days_v = detail::parse_cell(cells[0], row, "maturity_days");
        auto strike_v = detail::parse_cell(cells[1], row, "strike");
        if (!days_v || !strike_v)
            throw std::invalid_argument("load_chain: row " + std::to_string(row) +
                                        ": maturity_days and strike are required");
        int days = static_cast<int>(*days_v);
        if (days <= 0)
            throw std::invalid_argument("load_chain: row " + std::to_string(row) +
                                        ": maturity_days must be positive");
        OptionQuote q;
        q.strike = *strike_v;
        q.call_price = detail::parse_cell(cells[2], row, "call_price");
        q.put_price = detail::parse_cell(cells[3], row, "put_price");
        auto fwd = detail::parse_cell(cells[4], row, "forward");
        auto dsc = detail::parse_cell(cells[5], row, "discount");
        auto& g = groups[days];
        if (fwd) {
            if (g.forward && *g.forward != *fwd)
                throw std::invalid_argument("load_chain: row " + std::to_string(row) +
                                            ": conflicting forward for maturity " +
                                            std::to_string(days));
            g.forward = fwd;
        }
        if (dsc) {
            if (g.discount && *g.discount != *dsc)
                throw std::invalid_argument("load_chain: row " + std::to_string(row) +
                                            ": conflicting discount for maturity " +
                                            std::to_string(days));
            g.discount = dsc;
        }
        g.quotes.push_back(q);
    }

    Surface surf;
    for (auto& [days, g] : groups) {
        MarketSlice s;
        s.pricing_date = cfg.pricing_date;
        s.maturity_date = cfg.pricing_date.plus_days(days);
        s.time_to_maturity = days / 365.0;  // ACT/365
        if (g.forward)
            s.forward = *g.forward;
        else if (std::isfinite(cfg.spot))
            s.forward = cfg.spot;
        else
            throw std::invalid_argument("load_chain: maturity " + std::to_string(days) +
                                        ": no forward in file and no spot configured");
        s.discount = g.discount.value_or(1.0);
        s.volume = cfg.volume;
        s.quotes = std::move(g.quotes);
        surf.slices.push_back(std::move(s));
    }
    surf.validate();
    return surf;
}

inline void save_chain(const Surface& surf, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_chain: cannot open '" + path + "' for writing");
    out << kChainHeader << "\n";
    char buf[512];
    for (const auto& s : surf.slices) {
        int days = static_cast<int>(s.maturity_date.serial() - s.pricing_date.serial());
        for (const auto& q : s.quotes) {
            std::string call, put;
            if (q.call_price) {
                std::snprintf(buf, sizeof buf, "%.17g", *q.call_price);
                call = buf;
            }
            if (q.put_price) {
                std::snprintf(buf, sizeof buf, "%.17g", *q.put_price);
                put = buf;
            }
            char line[512];
            char fwd[64], dsc[64], strike[64];
            std::snprintf(strike, sizeof strike, "%.17g", q.strike);
            std::snprintf(fwd, sizeof fwd, "%.17g", s.forward);
            std::snprintf(dsc, sizeof dsc, "%.17g", s.discount);
            std::snprintf(line, sizeof line, "%d,%s,%s,%s,%s,%s", days, strike, call.c_str(),
                          put.c_str(), fwd, dsc);
            out << line << "\n";
        }
    }
}

}  // namespace bp
