#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// erfc-based, accurate far into the tails
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

// Acklam's rational approximation polished with one Halley step.
inline double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_ppf: p outside (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double u = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (p <= 1.0 - plow) {
        double u = p - 0.5, r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double u = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

// Bachelier prices in forward units; sigma is the total (undiscounted) vol of K/F.
inline double bachelier_put(double F, double K, double sigma) {
    double x = (K - F) / F;
    return F * (x * norm_cdf(x / sigma) + sigma * norm_pdf(x / sigma));
}

inline double bachelier_call(double F, double K, double sigma) {
    return bachelier_put(F, K, sigma) + (F - K);
}

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

inline std::vector<double> cum_trapezoid(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return out;
}

// Polynomial in the affine-mapped variable tau(t) = 2(t-t0)/(t1-t0) - 1;
// mapping keeps the normal equations well conditioned.
struct Poly {
    double t0 = 0.0, t1 = 1.0;
    std::vector<double> coeffs;  // ascending powers of tau

    double eval(double t) const {
        double tau = (t1 > t0) ? 2.0 * (t - t0) / (t1 - t0) - 1.0 : 0.0;
        double v = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) v = v * tau + coeffs[i];
        return v;
    }
};

// Least-squares polynomial fit; exact interpolation when degree == n-1.
inline Poly fit_poly(const std::vector<double>& t, const std::vector<double>& y, int degree) {
    const std::size_t n = t.size();
    if (n < 2) throw std::invalid_argument("fit_poly: need at least 2 points");
    if (degree < 1 || degree >= static_cast<int>(n))
        throw std::invalid_argument("fit_poly: degree must be in [1, n-1]");
    Poly p;
    p.t0 = *std::min_element(t.begin(), t.end());
    p.t1 = *std::max_element(t.begin(), t.end());
    const int m = degree + 1;
    std::vector<double> A(m * m, 0.0), rhs(m, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double tau = 2.0 * (t[k] - p.t0) / (p.t1 - p.t0) - 1.0;
        std::vector<double> pw(m);
        pw[0] = 1.0;
        for (int i = 1; i < m; ++i) pw[i] = pw[i - 1] * tau;
        for (int i = 0; i < m; ++i) {
            rhs[i] += pw[i] * y[k];
            for (int j = 0; j < m; ++j) A[i * m + j] += pw[i] * pw[j];
        }
    }
    // Gaussian elimination with partial pivoting (m <= 6)
    std::vector<int> piv(m);
    for (int i = 0; i < m; ++i) piv[i] = i;
    for (int col = 0; col < m; ++col) {
        int best = col;
        for (int r = col + 1; r < m; ++r)
            if (std::fabs(A[r * m + col]) > std::fabs(A[best * m + col])) best = r;
        if (best != col) {
            for (int j = 0; j < m; ++j) std::swap(A[col * m + j], A[best * m + j]);
            std::swap(rhs[col], rhs[best]);
        }
        double d = A[col * m + col];
        if (std::fabs(d) < 1e-300) throw std::runtime_error("fit_poly: singular normal equations");
        for (int r = col + 1; r < m; ++r) {
            double f = A[r * m + col] / d;
            for (int j = col; j < m; ++j) A[r * m + j] -= f * A[col * m + j];
            rhs[r] -= f * rhs[col];
        }
    }
    p.coeffs.assign(m, 0.0);
    for (int i = m - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < m; ++j) s -= A[i * m + j] * p.coeffs[j];
        p.coeffs[i] = s / A[i * m + i];
    }
    return p;
}

}  // namespace bp
