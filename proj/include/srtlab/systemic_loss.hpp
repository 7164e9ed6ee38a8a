#pragma once

// Expected systemic loss, marginal effects of liabilities and loans, and
// the systemic risk tax quote for a prospective interbank transaction.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "srtlab/debtrank.hpp"
#include "srtlab/network.hpp"

namespace srtlab {

// Constant-hazard default model per bank, plus a flat discount rate.
struct DefaultModel {
    std::vector<double> p_def;   // annual default probability
    std::vector<double> hazard;  // h_i = -ln(1 - p_def), per year
    double discount_rate = 0.0;  // continuously compounded, per year
    int steps_per_year = 20;

    static DefaultModel uniform(int n_banks, double p, double discount_rate = 0.0,
                                int steps_per_year = 20) {
        if (p < 0.0 || p >= 1.0)
            throw std::invalid_argument("default probability must be in [0,1)");
        DefaultModel m;
        m.p_def.assign(n_banks, p);
        m.hazard.assign(n_banks, -std::log1p(-p));
        m.discount_rate = discount_rate;
        m.steps_per_year = steps_per_year;
        return m;
    }

    static DefaultModel from_probabilities(std::vector<double> probs,
                                           double discount_rate = 0.0,
                                           int steps_per_year = 20) {
        DefaultModel m;
        m.hazard.reserve(probs.size());
        for (double p : probs) {
            if (p < 0.0 || p >= 1.0)
                throw std::invalid_argument("default probability must be in [0,1)");
            m.hazard.push_back(-std::log1p(-p));
        }
        m.p_def = std::move(probs);
        m.discount_rate = discount_rate;
        m.steps_per_year = steps_per_year;
        return m;
    }
};

struct SrtQuote {
    int debtor = 0;
    int creditor = 0;
    double principal = 0.0;
    double term_years = 0.0;
    std::vector<double> delta_r; // R_i(L^+k) - R_i(L), frozen weights
    double tax = 0.0;
    double zeta = 0.0;
};

// Discount-weighted default mass over [0,T]:
//   D(T) = int_0^T e^{-r t} h e^{-h t} dt = h/(h+r) (1 - e^{-(h+r)T}).
inline double discount_default_mass(double hazard, double rate, double term_years) {
    if (hazard <= 0.0) return 0.0;
    const double a = hazard + rate;
    if (a <= 0.0) return hazard * term_years; // r = -h degenerate limit
    return hazard / a * (-std::expm1(-a * term_years));
}

// EL_i = P_i^def * V * R_i, currency per year.
inline double expected_loss_node(const RiskProfile& profile, const DefaultModel& model, int i) {
    if (profile.r.size() != model.p_def.size())
        throw std::invalid_argument("profile/model bank count mismatch");
    if (i < 0 || i >= static_cast<int>(profile.r.size()))
        throw std::out_of_range("bank index out of range");
    return model.p_def[i] * profile.values.v_total * profile.r[i];
}

inline double expected_loss_total(const RiskProfile& profile, const DefaultModel& model) {
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(profile.r.size()); ++i)
        total += expected_loss_node(profile, model, i);
    return total;
}

namespace detail {

// Sum_i P_i V (R_i(modified) - R_i(base)), with v and V frozen at the base
// network so the difference measures propagation change only.
inline double marginal_effect(const LiabilityNetwork& base,
                              const LiabilityNetwork& modified,
                              const std::vector<double>& capital,
                              const DefaultModel& model, ValueWeights weights) {
    const EconomicValues values = economic_values(base, weights);
    if (values.degenerate) return 0.0;
    const RiskProfile before = risk_profile_with_values(base, capital, values);
    const RiskProfile after = risk_profile_with_values(modified, capital, values);
    double delta = 0.0;
    for (int i = 0; i < base.size(); ++i)
        delta += model.p_def[i] * values.v_total * (after.r[i] - before.r[i]);
    return delta;
}

} // namespace detail

// Delta^(-mn) EL: negative means L_mn increases total systemic risk.
inline double marginal_liability_effect(const LiabilityNetwork& net,
                                        const std::vector<double>& capital,
                                        const DefaultModel& model, int m, int n,
                                        ValueWeights weights = ValueWeights::Liabilities) {
    if (net.liability(m, n) == 0.0) return 0.0;
    return detail::marginal_effect(net, net.remove_liability(m, n), capital, model, weights);
}

enum class LoanDirection { Remove, Add };

inline double marginal_loan_effect(const LiabilityNetwork& net,
                                   const std::vector<double>& capital,
                                   const DefaultModel& model, LoanDirection direction,
                                   LoanId k = 0, const LoanRecord* loan = nullptr,
                                   ValueWeights weights = ValueWeights::Liabilities) {
    if (direction == LoanDirection::Remove)
        return detail::marginal_effect(net, net.without_loan(k), capital, model, weights);
    if (loan == nullptr) throw std::invalid_argument("loan record required for Add");
    return detail::marginal_effect(net, net.with_loan(*loan), capital, model, weights);
}

// SRT quote for a prospective loan. R is computed at t=0 with v, C frozen
// at the pre-transaction network; the time integral reduces to the
// closed-form discount-weighted default mass per node.
inline SrtQuote srt_quote(const LiabilityNetwork& net, const std::vector<double>& capital,
                          const DefaultModel& model, const LoanRecord& prospective,
                          double term_years, double zeta,
                          ValueWeights weights = ValueWeights::Liabilities) {
    if (term_years <= 0.0) throw std::invalid_argument("term must be positive");
    if (zeta <= 0.0 || zeta > 1.0) throw std::invalid_argument("zeta must be in (0,1]");
    if (prospective.debtor == prospective.creditor)
        throw std::invalid_argument("self-loan rejected");

    SrtQuote quote;
    quote.debtor = prospective.debtor;
    quote.creditor = prospective.creditor;
    quote.principal = prospective.principal;
    quote.term_years = term_years;
    quote.zeta = zeta;
    quote.delta_r.assign(net.size(), 0.0);

    const EconomicValues values = economic_values(net, weights);
    if (values.degenerate || prospective.principal == 0.0) {
        // First loan in an empty network carries no contagion exposure yet.
        return quote;
    }
    const RiskProfile before = risk_profile_with_values(net, capital, values);
    const RiskProfile after =
        risk_profile_with_values(net.with_loan(prospective), capital, values);

    double weighted = 0.0;
    for (int i = 0; i < net.size(); ++i) {
        quote.delta_r[i] = after.r[i] - before.r[i];
        weighted += quote.delta_r[i] * values.v_total *
                    discount_default_mass(model.hazard[i], model.discount_rate, term_years);
    }
    quote.tax = zeta * std::max(0.0, weighted);
    return quote;
}

} // namespace srtlab
