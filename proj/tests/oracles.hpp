#pragma once

// Test-only reference implementations, written independently of the library
// internals so they can serve as oracles.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "srtlab/network.hpp"

namespace oracle {

// Plain dense matrix operations on a copy of the liability matrix.
inline std::vector<std::vector<double>> to_dense(const srtlab::LiabilityNetwork& net) {
    const int n = net.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = net.liability(i, j);
    return m;
}

inline double naive_volume(const srtlab::LiabilityNetwork& net) {
    double v = 0.0;
    for (const auto& row : to_dense(net))
        for (double x : row) v += x;
    return v;
}

// Brute-force DebtRank: literal transcription of the recursion, keeping
// explicit sets of distressed/inactive nodes and recomputing impacts from
// the raw matrix each call.
inline double debtrank_bruteforce(const std::vector<std::vector<double>>& liab,
                                  const std::vector<double>& capital,
                                  const std::vector<double>& value_share, int seed) {
    const int n = static_cast<int>(liab.size());
    auto impact = [&](int i, int j) -> double {
        if (i == j || liab[i][j] == 0.0) return 0.0;
        if (capital[j] <= 0.0) return 1.0;
        double ratio = liab[i][j] / capital[j];
        return ratio > 1.0 ? 1.0 : ratio;
    };

    std::vector<double> h(n, 0.0);
    std::set<int> distressed;
    std::set<int> inactive;
    h[seed] = 1.0;
    distressed.insert(seed);

    while (!distressed.empty()) {
        std::vector<double> h_old = h;
        for (int j = 0; j < n; ++j) {
            double add = 0.0;
            for (int i : distressed) add += impact(i, j) * h_old[i];
            if (add > 0.0) h[j] = std::min(1.0, h_old[j] + add);
        }
        for (int i : distressed) inactive.insert(i);
        distressed.clear();
        for (int j = 0; j < n; ++j)
            if (h[j] > 0.0 && !inactive.count(j)) distressed.insert(j);
    }

    double r = 0.0;
    for (int j = 0; j < n; ++j) r += h[j] * value_share[j];
    return r - value_share[seed];
}

// Liability-share value weighting, computed from the raw matrix.
inline std::vector<double> liability_value_shares(const std::vector<std::vector<double>>& liab) {
    const int n = static_cast<int>(liab.size());
    double total = 0.0;
    std::vector<double> row_sums(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            row_sums[i] += liab[i][j];
            total += liab[i][j];
        }
    std::vector<double> v(n, 0.0);
    if (total > 0.0)
        for (int i = 0; i < n; ++i) v[i] = row_sums[i] / total;
    return v;
}

// Adaptive Simpson quadrature, used to check the closed-form discount mass.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 30) {
    auto simpson = [&](double lo, double hi) {
        double mid = 0.5 * (lo + hi);
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
    };
    std::function<double(double, double, double, int)> rec =
        [&](double lo, double hi, double whole, int d) -> double {
        double mid = 0.5 * (lo + hi);
        double left = simpson(lo, mid);
        double right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
    };
    return rec(a, b, simpson(a, b), depth);
}

// Numerical integral of the SRT discount mass integrand e^{-rt} h e^{-ht}.
inline double discount_mass_quadrature(double hazard, double rate, double term) {
    if (hazard <= 0.0) return 0.0;
    return adaptive_simpson(
        [=](double t) { return std::exp(-rate * t) * hazard * std::exp(-hazard * t); }, 0.0,
        term);
}

} // namespace oracle
