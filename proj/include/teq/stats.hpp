#ifndef TEQ_STATS_HPP
#define TEQ_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "teq/error.hpp"

namespace teq {

namespace detail {

// Continued fraction for the regularized incomplete beta, modified Lentz.
inline double betacf(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-14;
    constexpr int kMaxIter = 300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw state_error("incomplete beta continued fraction did not converge");
}

// Regularized incomplete beta I_x(a, b).
inline double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

} // namespace detail

// Product-moment correlation coefficient.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw invalid_input("pearson: vectors differ in length");
    const std::size_t n = xs.size();
    if (n < 2) throw invalid_input("pearson: need at least 2 samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw invalid_input("pearson: zero variance input");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

// Two-sided p-value of the observed correlation under the null of no
// dependence: t = r sqrt((n-2)/(1-r^2)) against Student-t with n-2 dof,
// which collapses to I_{1-r^2}((n-2)/2, 1/2). Floored at 1e-300 so extreme
// correlations never report an exact zero by underflow.
inline double p_value(double r, std::size_t n) {
    if (n < 3) throw invalid_input("p_value: need n >= 3");
    if (!(r >= -1.0 && r <= 1.0)) throw invalid_input("p_value: |r| must be <= 1");
    if (r == 1.0 || r == -1.0) return 0.0;
    const double nu = static_cast<double>(n - 2);
    double p = detail::ibeta(nu / 2.0, 0.5, 1.0 - r * r);
    if (p <= 0.0) p = 1e-300;
    return std::min(p, 1.0);
}

struct CorrelationReport {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

inline CorrelationReport correlate(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
    CorrelationReport rep;
    rep.n = xs.size();
    if (rep.n < 3) throw invalid_input("correlate: need at least 3 paired samples");
    rep.r = pearson(xs, ys);
    rep.p = p_value(rep.r, rep.n);
    return rep;
}

// Descending by value, ties broken by line id ascending.
inline std::vector<std::pair<std::string, double>> rank_lines(
    std::vector<std::pair<std::string, double>> scores) {
    std::sort(scores.begin(), scores.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    return scores;
}

} // namespace teq

#endif
