#pragma once

#include <stdexcept>
#include <string>

#include "srtlab/debtrank.hpp"

namespace srtlab::abm {

enum class TaxMode { None, Srt, Ftt };

inline const char* to_string(TaxMode m) {
    switch (m) {
    case TaxMode::Srt: return "srt";
    case TaxMode::Ftt: return "ftt";
    default: return "none";
    }
}

inline TaxMode tax_mode_from_string(const std::string& s) {
    if (s == "none") return TaxMode::None;
    if (s == "srt") return TaxMode::Srt;
    if (s == "ftt") return TaxMode::Ftt;
    throw std::invalid_argument("unknown tax mode: " + s);
}

struct ModelConfig {
    // population
    int banks = 20;
    int firms = 100;
    int households = 1300;
    int steps = 500;

    // tax regime
    TaxMode tax_mode = TaxMode::None;
    double zeta = 0.02;
    bool srt_full = false;     // zeta = 1 alternative
    double ftt_rate = 0.022;   // flat fraction of notional per transaction

    // risk model
    double p_def = 0.01;
    double discount_rate = 0.0;
    int steps_per_year = 20;
    double srt_term_cap_years = 1.0;
    ValueWeights value_weights = ValueWeights::Liabilities;

    // real economy
    double wage = 1.0;
    double labor_productivity = 0.5;  // alpha
    double consumption_rate = 0.8;    // c
    int firms_compared = 2;           // z
    int banks_approached = 2;         // n
    double rate_threshold = 0.1;     // r_max, annual: firm-side reduced-loan trigger
    double ib_rate_cap = 0.1;        // max all-in rate for refinance borrowing
    double liquidity_rate_cap = 0.1; // max all-in rate for reserve borrowing
    double reduced_loan_fraction = 0.8; // phi
    double repayment_fraction = 0.05;
    double ib_repayment_fraction = 0.05; // interbank amortization per step   // tau, per step
    double price_adjust_max = 0.1;      // eta_max
    double demand_adjust_max = 0.1;     // nu_max
    double dividend_fraction = 1.0;     // share of positive net profit paid out

    // bank pricing
    double rate_base = 0.04;        // annual base rate
    double rate_spread = 0.005;     // sigma_bank, per-bank per-step uniform draw
    double fragility_premium = 0.002; // rho coefficient on firm fragility

    // initial endowments
    double init_household_account = 1.0;
    double init_firm_liquidity = 4.0;
    double init_bank_liquidity = 40.0;
    double init_bank_capital = 30.0;
    double init_bank_capital_spread = 0.0; // relative half-width of uniform draw
    double exposure_limit = 0.5; // max single counterparty claim / lender capital

    // run control
    bool stop_on_first_cascade = true;
    int volume_step = 100;          // T for the transaction-volume observable
    int sample_every = 100;         // R-profile / marginal-effect sampling stride

    double effective_zeta() const { return srt_full ? 1.0 : zeta; }

    void validate() const {
        if (banks <= 0 || firms <= 0 || households <= 0 || steps <= 0)
            throw std::invalid_argument("population counts and steps must be positive");
        if (households < firms)
            throw std::invalid_argument("need at least one household per firm owner");
        for (double f : {consumption_rate, reduced_loan_fraction, repayment_fraction,
                         dividend_fraction, ftt_rate, p_def})
            if (f < 0.0 || f > 1.0)
                throw std::invalid_argument("fractions must lie in [0,1]");
        if (zeta <= 0.0 || zeta > 1.0)
            throw std::invalid_argument("zeta must be in (0,1]");
        if (steps_per_year <= 0) throw std::invalid_argument("steps_per_year must be positive");
        if (exposure_limit <= 0.0)
            throw std::invalid_argument("exposure_limit must be positive");
        if (init_bank_capital_spread < 0.0 || init_bank_capital_spread >= 1.0)
            throw std::invalid_argument("init_bank_capital_spread must be in [0,1)");
    }
};

} // namespace srtlab::abm
