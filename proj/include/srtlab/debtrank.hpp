#pragma once

// DebtRank: recursive distress propagation on the liability network.
// R_i is the fraction of total economic value affected by the default of
// bank i, computed with the two-variable recursion (distress level h plus
// a three-state flag so each node propagates exactly once).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "srtlab/network.hpp"

namespace srtlab {

// W(i,j) = fraction of j's capital wiped out by a full default of i.
struct ImpactMatrix {
    int n = 0;
    std::vector<double> w; // row-major, w[i*n+j]

    double operator()(int i, int j) const {
        return w[static_cast<std::size_t>(i) * n + j];
    }
};

enum class ValueWeights { Liabilities, Assets };

inline const char* to_string(ValueWeights vw) {
    return vw == ValueWeights::Liabilities ? "liabilities" : "assets";
}

// Per-node economic value shares v_i (sum to 1) and the total V they refer to.
struct EconomicValues {
    std::vector<double> v;
    double v_total = 0.0;
    bool degenerate = false; // V == 0
};

struct RiskProfile {
    std::vector<double> r;
    EconomicValues values;
    int iterations_used = 0;
};

inline ImpactMatrix impact_matrix(const LiabilityNetwork& net,
                                  const std::vector<double>& capital) {
    const int n = net.size();
    if (static_cast<int>(capital.size()) != n)
        throw std::invalid_argument("capital vector length mismatch");
    ImpactMatrix w;
    w.n = n;
    w.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double lij = net.liability(i, j);
            if (lij <= 0.0) continue;
            // An insolvent creditor is wiped out by any loss.
            w.w[static_cast<std::size_t>(i) * n + j] =
                capital[j] > 0.0 ? std::min(1.0, lij / capital[j]) : 1.0;
        }
    }
    return w;
}

inline EconomicValues economic_values(const LiabilityNetwork& net,
                                      ValueWeights weights = ValueWeights::Liabilities) {
    const int n = net.size();
    EconomicValues ev;
    ev.v.assign(n, 0.0);
    ev.v_total = net.total_volume();
    if (ev.v_total <= 0.0) {
        ev.v_total = 0.0;
        ev.degenerate = true;
        return ev;
    }
    for (int i = 0; i < n; ++i) {
        const double share = weights == ValueWeights::Liabilities
                                 ? net.liabilities_of(i)
                                 : net.assets_of(i);
        ev.v[i] = share / ev.v_total;
    }
    return ev;
}

namespace detail {

enum class NodeState { Undistressed, Distressed, Inactive };

// Propagation from a set of initially distressed nodes with initial
// distress psi. Returns final h and the number of sweeps used.
inline int propagate(const ImpactMatrix& w, const std::vector<int>& seeds,
                     double psi, std::vector<double>& h) {
    const int n = w.n;
    h.assign(n, 0.0);
    std::vector<NodeState> state(n, NodeState::Undistressed);
    for (int s : seeds) {
        if (s < 0 || s >= n) throw std::out_of_range("seed index out of range");
        h[s] = psi;
        state[s] = NodeState::Distressed;
    }
    int iterations = 0;
    std::vector<double> h_prev;
    bool any_distressed = !seeds.empty();
    while (any_distressed) {
        ++iterations;
        h_prev = h;
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                if (state[i] == NodeState::Distressed)
                    acc += w(i, j) * h_prev[i];
            if (acc > 0.0) h[j] = std::min(1.0, h_prev[j] + acc);
        }
        // Nodes that just propagated become inactive; newly hit nodes distressed.
        for (int i = 0; i < n; ++i)
            if (state[i] == NodeState::Distressed) state[i] = NodeState::Inactive;
        any_distressed = false;
        for (int j = 0; j < n; ++j) {
            if (state[j] == NodeState::Undistressed && h[j] > 0.0) {
                state[j] = NodeState::Distressed;
                any_distressed = true;
            }
        }
    }
    return iterations;
}

} // namespace detail

// Single-seed DebtRank: R_seed = sum_j h_j(T) v_j - h_seed(1) v_seed.
inline double debtrank(const LiabilityNetwork& net, const std::vector<double>& capital,
                       const EconomicValues& values, int seed) {
    const ImpactMatrix w = impact_matrix(net, capital);
    std::vector<double> h;
    detail::propagate(w, {seed}, 1.0, h);
    double r = 0.0;
    for (int j = 0; j < w.n; ++j) r += h[j] * values.v[j];
    return r - values.v[seed];
}

// Multi-seed variant: initial distress psi on every seed.
inline double debtrank_set(const LiabilityNetwork& net, const std::vector<double>& capital,
                           const EconomicValues& values, const std::vector<int>& seeds,
                           double psi = 1.0) {
    const ImpactMatrix w = impact_matrix(net, capital);
    std::vector<double> h;
    detail::propagate(w, seeds, psi, h);
    double r = 0.0;
    for (int j = 0; j < w.n; ++j) r += h[j] * values.v[j];
    for (int s : seeds) r -= psi * values.v[s];
    return r;
}

// DebtRank of every node against externally fixed economic values.
inline RiskProfile risk_profile_with_values(const LiabilityNetwork& net,
                                            const std::vector<double>& capital,
                                            const EconomicValues& values) {
    const int n = net.size();
    RiskProfile profile;
    profile.values = values;
    profile.r.assign(n, 0.0);
    if (values.degenerate) return profile;
    const ImpactMatrix w = impact_matrix(net, capital);
    std::vector<double> h;
    for (int seed = 0; seed < n; ++seed) {
        int iters = detail::propagate(w, {seed}, 1.0, h);
        profile.iterations_used = std::max(profile.iterations_used, iters);
        double r = 0.0;
        for (int j = 0; j < n; ++j) r += h[j] * values.v[j];
        profile.r[seed] = r - values.v[seed];
    }
    return profile;
}

inline RiskProfile risk_profile(const LiabilityNetwork& net,
                                const std::vector<double>& capital,
                                ValueWeights weights = ValueWeights::Liabilities) {
    return risk_profile_with_values(net, capital, economic_values(net, weights));
}

} // namespace srtlab
