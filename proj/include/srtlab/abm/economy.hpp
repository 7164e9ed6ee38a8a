#pragma once

// Macro-financial agent-based model: households, firms and banks on credit,
// interbank, labor and goods markets, with firm bankruptcies and zero-recovery
// interbank default cascades. Cash lives in four pools (household accounts,
// firm liquidity, bank liquidity, bailout fund); every market move is a
// transfer between pools, so the total is conserved.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "srtlab/abm/config.hpp"
#include "srtlab/debtrank.hpp"
#include "srtlab/network.hpp"
#include "srtlab/systemic_loss.hpp"

namespace srtlab::abm {

struct Household {
    double account = 0.0;
    int bank = 0;
    int employer = -1;   // firm index, -1 unemployed
    int owned_firm = -1; // -1 for workers
};

struct FirmLoan {
    LoanId id = 0;
    int bank = 0;
    double outstanding = 0.0;
    double rate_per_step = 0.0;
};

struct Firm {
    double liquidity = 0.0;
    double price = 1.0;
    double expected_demand = 0.0;
    double inventory = 0.0;
    double production = 0.0;
    double last_sales_units = 0.0;
    bool sold_out = false;
    bool had_leftover = false;
    bool insolvent = false;
    int bank = 0;
    int owner = 0;
    std::vector<int> workers;
    std::vector<FirmLoan> loans;
    // per-step scratch
    double revenue = 0.0;
    double wage_bill = 0.0;
    double interest_paid = 0.0;
    int desired_workforce = 0;
    double credit_demand = 0.0;
    double loan_rate_quote = 0.0;
};

struct Bank {
    double capital = 0.0;
    double liquidity = 0.0;
    bool alive = true;
    double rate_noise = 0.0;      // per-step specificity draw
    double deposit_outflow = 0.0; // per-step net customer outflow
};

struct CascadeReport {
    std::vector<int> defaulted_banks;
    int cascade_size = 0;
    double total_losses = 0.0;
    int trigger = -1;
};

// Zero-recovery default contagion to its fixed point. A bank defaults if its
// capital minus the write-offs from the full current default set is negative;
// evaluating against the whole set each sweep makes the result independent of
// processing order. Losses are measured on the passed (pre-cascade) network.
inline CascadeReport default_cascade(const LiabilityNetwork& net,
                                     const std::vector<double>& capital,
                                     const std::vector<int>& initially_defaulted,
                                     const std::vector<bool>* alive = nullptr) {
    const int n = net.size();
    std::vector<bool> defaulted(n, false);
    for (int b : initially_defaulted) defaulted[b] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int j = 0; j < n; ++j) {
            if (defaulted[j] || (alive && !(*alive)[j])) continue;
            double writeoff = 0.0;
            for (int i = 0; i < n; ++i)
                if (defaulted[i]) writeoff += net.liability(i, j);
            if (capital[j] - writeoff < 0.0) {
                defaulted[j] = true;
                changed = true;
            }
        }
    }
    CascadeReport report;
    report.trigger = initially_defaulted.empty() ? -1 : initially_defaulted.front();
    for (int b = 0; b < n; ++b) {
        if (!defaulted[b]) continue;
        report.defaulted_banks.push_back(b);
        for (int j = 0; j < n; ++j) report.total_losses += net.liability(b, j);
    }
    report.cascade_size = static_cast<int>(report.defaulted_banks.size());
    return report;
}

struct IbLoanEvent {
    LoanId id = 0;
    int debtor = 0;
    int creditor = 0;
    int step = 0;
    double principal = 0.0;
    double rate_annual = 0.0;
    double tax = 0.0;
    bool refinancing = false; // true when funding a firm loan, false for reserves
};

struct StepEvents {
    int step = 0;
    std::vector<IbLoanEvent> ib_loans;
    double new_ib_principal = 0.0;
    double taxes_collected = 0.0;
    int firm_defaults = 0;
    double firm_credit_granted = 0.0;
    std::optional<CascadeReport> cascade;
    bool terminated = false;
};

struct EconomyState {
    std::vector<Household> households;
    std::vector<Firm> firms;
    std::vector<Bank> banks;
    LiabilityNetwork interbank{1};
    double bailout_fund = 0.0;
    int t = 0;
    LoanId next_loan_id = 1;
    bool terminated = false;

    double total_cash() const {
        double total = bailout_fund;
        for (const auto& h : households) total += h.account;
        for (const auto& f : firms) total += f.liquidity;
        for (const auto& b : banks) total += b.liquidity;
        return total;
    }
};

class Simulation {
public:
    Simulation(ModelConfig config, std::uint64_t seed)
        : cfg_(std::move(config)), rng_(seed) {
        cfg_.validate();
        model_ = DefaultModel::uniform(cfg_.banks, cfg_.p_def, cfg_.discount_rate,
                                       cfg_.steps_per_year);
        init_state();
    }

    const ModelConfig& config() const { return cfg_; }
    const EconomyState& state() const { return state_; }
    std::mt19937_64& rng() { return rng_; }

    // One model step; returns the events it produced.
    StepEvents step() {
        StepEvents ev;
        ev.step = state_.t;
        if (state_.terminated) {
            ev.terminated = true;
            return ev;
        }

        draw_bank_noise();
        refresh_tax_quotes();
        plan_firms();
        credit_market(ev);
        labor_market_and_production();
        goods_market();
        liquidity_pass(ev);
        repayments();
        pay_dividends();
        resolve_firm_bankruptcies(ev);
        resolve_bank_cascade(ev);

        ++state_.t;
        if (ev.cascade && cfg_.stop_on_first_cascade) state_.terminated = true;
        if (!any_bank_alive()) state_.terminated = true;
        ev.terminated = state_.terminated;
        return ev;
    }

    std::vector<double> bank_capitals() const {
        std::vector<double> c(state_.banks.size());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = state_.banks[i].capital;
        return c;
    }

    const DefaultModel& default_model() const { return model_; }

    // Offered firm-loan rate, annual. Exposed for rate-distribution tests.
    double bank_rate(int bank, const Firm& firm) const {
        return cfg_.rate_base + state_.banks[bank].rate_noise +
               cfg_.fragility_premium * firm_fragility(firm);
    }

    static double fragility(double debt, double liquidity) {
        return debt / (std::max(0.0, liquidity) + 1.0);
    }

private:
    ModelConfig cfg_;
    EconomyState state_;
    DefaultModel model_;
    std::mt19937_64 rng_;
    std::vector<double> tax_rate_; // quoted tax rate-equivalents, row = borrower

    double firm_fragility(const Firm& f) const {
        double debt = 0.0;
        for (const auto& l : f.loans) debt += l.outstanding;
        return fragility(debt, f.liquidity);
    }

    double bank_fragility(int b) const {
        const auto& bank = state_.banks[b];
        return fragility(state_.interbank.liabilities_of(b),
                         bank.liquidity + std::max(0.0, bank.capital));
    }

    bool any_bank_alive() const {
        for (const auto& b : state_.banks)
            if (b.alive) return true;
        return false;
    }

    void init_state() {
        state_.households.resize(cfg_.households);
        state_.firms.resize(cfg_.firms);
        state_.banks.resize(cfg_.banks);
        state_.interbank = LiabilityNetwork(cfg_.banks);

        std::uniform_int_distribution<int> bank_pick(0, cfg_.banks - 1);
        for (int h = 0; h < cfg_.households; ++h) {
            auto& hh = state_.households[h];
            hh.account = cfg_.init_household_account;
            hh.bank = bank_pick(rng_);
            hh.owned_firm = h < cfg_.firms ? h : -1;
        }
        const int workers = cfg_.households - cfg_.firms;
        const double init_demand =
            std::max(cfg_.labor_productivity,
                     cfg_.labor_productivity * workers / cfg_.firms);
        // heterogeneous prices around the break-even unit labor cost; the
        // relative-price adjustment rule needs dispersion to act on
        std::uniform_real_distribution<double> price_noise(0.95, 1.05);
        for (int f = 0; f < cfg_.firms; ++f) {
            auto& firm = state_.firms[f];
            firm.liquidity = cfg_.init_firm_liquidity;
            firm.price = cfg_.wage / cfg_.labor_productivity * price_noise(rng_);
            firm.expected_demand = init_demand;
            firm.last_sales_units = init_demand;
            firm.bank = bank_pick(rng_);
            firm.owner = f;
        }
        // heterogeneous capitalization: without dispersion all banks deplete
        // in lockstep and every late default is a synchronized full-system
        // cascade, independent of network shape
        // at spread 0 skip the draw entirely so the RNG stream (and thus
        // every downstream trajectory) is unchanged from the homogeneous case
        std::uniform_real_distribution<double> cap_spread(1.0 - cfg_.init_bank_capital_spread,
                                                          1.0 + cfg_.init_bank_capital_spread);
        for (auto& b : state_.banks) {
            b.capital = cfg_.init_bank_capital_spread > 0.0
                            ? cfg_.init_bank_capital * cap_spread(rng_)
                            : cfg_.init_bank_capital;
            b.liquidity = cfg_.init_bank_liquidity;
        }
    }

    void draw_bank_noise() {
        std::uniform_real_distribution<double> u(0.0, cfg_.rate_spread);
        for (auto& b : state_.banks) {
            b.rate_noise = u(rng_);
            b.deposit_outflow = 0.0;
        }
    }

    double average_price() const {
        double sum = 0.0;
        for (const auto& f : state_.firms) sum += f.price;
        return sum / state_.firms.size();
    }

    void plan_firms() {
        const double p_bar = average_price();
        std::uniform_real_distribution<double> eta(0.0, cfg_.price_adjust_max);
        std::uniform_real_distribution<double> nu(0.0, cfg_.demand_adjust_max);
        for (auto& f : state_.firms) {
            f.revenue = 0.0;
            f.wage_bill = 0.0;
            f.interest_paid = 0.0;
            if (f.sold_out && f.price < p_bar) f.price *= 1.0 + eta(rng_);
            else if (f.had_leftover && f.price > p_bar) f.price *= 1.0 - eta(rng_);
            if (f.sold_out) f.expected_demand = f.last_sales_units * (1.0 + nu(rng_));
            else if (f.had_leftover) f.expected_demand = f.last_sales_units * (1.0 - nu(rng_));
            f.expected_demand = std::max(f.expected_demand, cfg_.labor_productivity);
            f.desired_workforce =
                static_cast<int>(std::ceil(f.expected_demand / cfg_.labor_productivity));
            const double bill = f.desired_workforce * cfg_.wage;
            f.credit_demand = std::max(0.0, bill - f.liquidity);
        }
    }

    std::vector<int> shuffled_indices(std::size_t n) {
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        std::shuffle(idx.begin(), idx.end(), rng_);
        return idx;
    }

    // Sample k distinct alive banks.
    std::vector<int> sample_banks(int k) {
        std::vector<int> alive;
        for (int b = 0; b < cfg_.banks; ++b)
            if (state_.banks[b].alive) alive.push_back(b);
        std::shuffle(alive.begin(), alive.end(), rng_);
        if (static_cast<int>(alive.size()) > k) alive.resize(k);
        return alive;
    }

    struct IbOffer {
        int lender = 0;
        double capacity = 0.0;
        double rate_annual = 0.0;     // plain interbank rate
        double tax_rate_annual = 0.0; // tax converted to an annual rate add-on
    };

    // Annualized tax rate-equivalents per unit of principal, quoted at market
    // open against the current network. Actual taxes are recomputed exactly on
    // the pre-trade snapshot when a loan executes.
    void refresh_tax_quotes() {
        tax_rate_.assign(static_cast<std::size_t>(cfg_.banks) * cfg_.banks, 0.0);
        if (cfg_.tax_mode == TaxMode::None) return;
        if (cfg_.tax_mode == TaxMode::Ftt) {
            const double flat = cfg_.ftt_rate / cfg_.srt_term_cap_years;
            for (auto& r : tax_rate_) r = flat;
            return;
        }
        const auto values = economic_values(state_.interbank, cfg_.value_weights);
        if (values.degenerate) return;
        const auto capital = bank_capitals();
        const RiskProfile before = risk_profile_with_values(state_.interbank, capital, values);
        const double probe = 1.0;
        for (int b = 0; b < cfg_.banks; ++b) {
            if (!state_.banks[b].alive) continue;
            for (int l = 0; l < cfg_.banks; ++l) {
                if (l == b || !state_.banks[l].alive) continue;
                LoanRecord prospective{state_.next_loan_id, b, l, probe};
                const RiskProfile after = state_.interbank.probe_loan(
                    prospective, [&](const LiabilityNetwork& net) {
                        return risk_profile_with_values(net, capital, values);
                    });
                double weighted = 0.0;
                for (int i = 0; i < cfg_.banks; ++i)
                    weighted += (after.r[i] - before.r[i]) * values.v_total *
                                discount_default_mass(model_.hazard[i], model_.discount_rate,
                                                      cfg_.srt_term_cap_years);
                tax_rate_[static_cast<std::size_t>(b) * cfg_.banks + l] =
                    cfg_.effective_zeta() * std::max(0.0, weighted) /
                    (probe * cfg_.srt_term_cap_years);
            }
        }
    }

    double quoted_tax_rate(int borrower, int lender) const {
        return tax_rate_[static_cast<std::size_t>(borrower) * cfg_.banks + lender];
    }

    // Quotes from all potential lenders for `borrower` seeking `amount`.
    std::vector<IbOffer> collect_ib_offers(int borrower, double amount) {
        std::vector<IbOffer> offers;
        const double borrower_premium =
            cfg_.fragility_premium * bank_fragility(borrower);
        for (int l = 0; l < cfg_.banks; ++l) {
            if (l == borrower || !state_.banks[l].alive) continue;
            // large-exposure limit: a lender caps its claim on any single
            // counterparty at a fraction of its own capital
            const double limit =
                cfg_.exposure_limit * std::max(0.0, state_.banks[l].capital) -
                state_.interbank.liability(borrower, l);
            const double capacity =
                std::min(std::max(0.0, state_.banks[l].liquidity), std::max(0.0, limit));
            if (capacity <= 1e-12) continue;
            IbOffer offer;
            offer.lender = l;
            offer.capacity = capacity;
            offer.rate_annual = cfg_.rate_base + state_.banks[l].rate_noise + borrower_premium;
            offer.tax_rate_annual = quoted_tax_rate(borrower, l);
            offers.push_back(offer);
        }
        // Ascending by total rate; ties broken by the pre-sort shuffle.
        std::shuffle(offers.begin(), offers.end(), rng_);
        std::stable_sort(offers.begin(), offers.end(), [](const IbOffer& a, const IbOffer& b) {
            return a.rate_annual + a.tax_rate_annual < b.rate_annual + b.tax_rate_annual;
        });
        return offers;
    }

    // Expected all-in annual cost of borrowing `amount` on the interbank
    // market, or nothing if acceptable capacity cannot cover it.
    std::optional<double> estimate_funding_cost(std::vector<IbOffer>& offers, double amount,
                                                double cap_annual) const {
        double remaining = amount;
        double cost = 0.0;
        for (const auto& o : offers) {
            if (remaining <= 1e-12) break;
            if (o.rate_annual + o.tax_rate_annual > cap_annual) break;
            const double fill = std::min(remaining, o.capacity);
            cost += fill * (o.rate_annual + o.tax_rate_annual);
            remaining -= fill;
        }
        if (remaining > 1e-9) return std::nullopt;
        return cost;
    }

    struct IbBorrowResult {
        double filled = 0.0;
        double cost_annual_weighted = 0.0; // sum fill * (rate + tax rate)
    };

    // Borrow `amount` on the interbank market; offers with a total rate above
    // `cap_annual` are not acceptable. With require_full, nothing is executed
    // unless acceptable capacity covers the full amount.
    IbBorrowResult interbank_borrow(int borrower, double amount, double cap_annual,
                                    bool require_full, StepEvents& ev,
                                    bool refinancing = false) {
        IbBorrowResult result;
        if (amount <= 0.0) return result;
        auto offers = collect_ib_offers(borrower, amount);

        double acceptable = 0.0;
        for (const auto& o : offers)
            if (o.rate_annual + o.tax_rate_annual <= cap_annual) acceptable += o.capacity;
        if (require_full && acceptable + 1e-9 < amount) return result;

        double remaining = amount;
        for (const auto& o : offers) {
            if (remaining <= 1e-12) break;
            if (o.rate_annual + o.tax_rate_annual > cap_annual) break;
            const double fill = std::min(remaining, o.capacity);
            execute_ib_loan(borrower, o.lender, fill, o.rate_annual, ev, refinancing);
            result.filled += fill;
            result.cost_annual_weighted += fill * (o.rate_annual + o.tax_rate_annual);
            remaining -= fill;
        }
        return result;
    }

    void execute_ib_loan(int borrower, int lender, double principal, double rate_annual,
                         StepEvents& ev, bool refinancing) {
        // Tax is charged on the pre-trade network snapshot.
        double tax = 0.0;
        if (cfg_.tax_mode == TaxMode::Srt) {
            LoanRecord prospective{state_.next_loan_id, borrower, lender, principal};
            tax = srt_quote(state_.interbank, bank_capitals(), model_, prospective,
                            cfg_.srt_term_cap_years, cfg_.effective_zeta(), cfg_.value_weights)
                      .tax;
        } else if (cfg_.tax_mode == TaxMode::Ftt) {
            tax = cfg_.ftt_rate * principal;
        }

        LoanRecord loan;
        loan.id = state_.next_loan_id++;
        loan.debtor = borrower;
        loan.creditor = lender;
        loan.principal = principal;
        loan.rate = rate_annual / cfg_.steps_per_year;
        loan.srt_paid = cfg_.tax_mode == TaxMode::Srt ? tax : 0.0;
        loan.origination_step = state_.t;
        state_.interbank.book_loan(loan);

        state_.banks[lender].liquidity -= principal;
        state_.banks[borrower].liquidity += principal;
        if (tax > 0.0) {
            // SRT is levied on the borrower initiating the risky position; the
            // FTT is a levy on the offered rate, folded into the quote and
            // remitted by the offering (lending) bank.
            const int payer = cfg_.tax_mode == TaxMode::Ftt ? lender : borrower;
            state_.banks[payer].liquidity -= tax;
            state_.banks[payer].capital -= tax;
            state_.bailout_fund += tax;
            ev.taxes_collected += tax;
        }
        ev.ib_loans.push_back(
            {loan.id, borrower, lender, state_.t, principal, rate_annual, tax, refinancing});
        ev.new_ib_principal += principal;
    }

    void credit_market(StepEvents& ev) {
        for (int fi : shuffled_indices(state_.firms.size())) {
            auto& firm = state_.firms[fi];
            firm.loan_rate_quote = 0.0;
            if (firm.credit_demand <= 0.0) continue;
            auto candidates = sample_banks(cfg_.banks_approached);
            if (candidates.empty()) continue;

            // Each bank quotes an all-in rate: its own rate plus a premium for
            // any interbank refinancing it would need. Funding costs, taxes
            // included, remain with the firm.
            const double amount_asked = firm.credit_demand;
            int best = -1;
            double best_rate = 0.0;
            double best_premium = 0.0;
            int n_best = 0;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int b : candidates) {
                const double own_rate = bank_rate(b, firm);
                const double own = std::max(0.0, state_.banks[b].liquidity);
                double premium = 0.0;
                if (own < amount_asked) {
                    const double shortfall = amount_asked - own;
                    auto offers = collect_ib_offers(b, shortfall);
                    auto cost = estimate_funding_cost(offers, shortfall, cfg_.ib_rate_cap);
                    if (!cost) continue; // bank cannot fund the loan
                    premium = std::max(0.0, *cost - own_rate * shortfall) / amount_asked;
                }
                const double all_in = own_rate + premium;
                if (best < 0 || all_in < best_rate) {
                    best = b;
                    best_rate = all_in;
                    best_premium = premium;
                    n_best = 1;
                } else if (all_in == best_rate) {
                    // uniform tie-break among minima
                    ++n_best;
                    if (u(rng_) < 1.0 / n_best) best = b;
                }
            }
            if (best < 0) continue;

            double amount = amount_asked;
            if (best_rate > cfg_.rate_threshold) amount *= cfg_.reduced_loan_fraction;
            if (amount <= 0.0) continue;

            auto& bank = state_.banks[best];
            double pass_through = 0.0;
            const double own = std::max(0.0, bank.liquidity);
            if (own < amount) {
                const double shortfall = amount - own;
                auto borrowed = interbank_borrow(best, shortfall, cfg_.ib_rate_cap,
                                                /*require_full=*/true, ev,
                                                /*refinancing=*/true);
                if (borrowed.filled + 1e-9 < shortfall) continue; // loan not paid out
                const double base_rate = best_rate - best_premium;
                pass_through = std::max(0.0, borrowed.cost_annual_weighted -
                                                 base_rate * borrowed.filled) /
                               amount;
            }

            const double annual_rate = (best_rate - best_premium) + pass_through;
            FirmLoan loan;
            loan.id = state_.next_loan_id++;
            loan.bank = best;
            loan.outstanding = amount;
            loan.rate_per_step = annual_rate / cfg_.steps_per_year;
            firm.loans.push_back(loan);
            firm.loan_rate_quote = annual_rate;
            bank.liquidity -= amount;
            firm.liquidity += amount;
            ev.firm_credit_granted += amount;
        }
    }

    void labor_market_and_production() {
        // unemployed pool
        std::vector<int> unemployed;
        for (int h = 0; h < cfg_.households; ++h) {
            const auto& hh = state_.households[h];
            if (hh.owned_firm < 0 && hh.employer < 0) unemployed.push_back(h);
        }
        std::shuffle(unemployed.begin(), unemployed.end(), rng_);

        for (int fi : shuffled_indices(state_.firms.size())) {
            auto& firm = state_.firms[fi];
            const int affordable =
                static_cast<int>(std::floor(std::max(0.0, firm.liquidity) / cfg_.wage));
            const int target = std::min(firm.desired_workforce, affordable);
            while (static_cast<int>(firm.workers.size()) > target) {
                std::uniform_int_distribution<std::size_t> pick(0, firm.workers.size() - 1);
                const std::size_t w = pick(rng_);
                state_.households[firm.workers[w]].employer = -1;
                unemployed.push_back(firm.workers[w]);
                firm.workers[w] = firm.workers.back();
                firm.workers.pop_back();
            }
            while (static_cast<int>(firm.workers.size()) < target && !unemployed.empty()) {
                const int h = unemployed.back();
                unemployed.pop_back();
                state_.households[h].employer = fi;
                firm.workers.push_back(h);
            }
            // wages and production
            for (int h : firm.workers) {
                firm.liquidity -= cfg_.wage;
                state_.households[h].account += cfg_.wage;
            }
            firm.wage_bill = firm.workers.size() * cfg_.wage;
            firm.production = cfg_.labor_productivity * firm.workers.size();
            firm.inventory = firm.production; // goods perish each step
        }
    }

    void goods_market() {
        std::uniform_int_distribution<int> firm_pick(0, cfg_.firms - 1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int hi : shuffled_indices(state_.households.size())) {
            auto& hh = state_.households[hi];
            const double budget = cfg_.consumption_rate * hh.account;
            if (budget <= 0.0) continue;
            int chosen = -1;
            double chosen_price = 0.0;
            for (int s = 0; s < cfg_.firms_compared; ++s) {
                const int f = firm_pick(rng_);
                if (state_.firms[f].inventory <= 1e-12) continue;
                if (chosen < 0 || state_.firms[f].price < chosen_price) {
                    chosen = f;
                    chosen_price = state_.firms[f].price;
                }
            }
            if (chosen < 0) continue;
            auto& firm = state_.firms[chosen];
            const double qty = std::min(budget / firm.price, firm.inventory);
            const double spend = qty * firm.price;
            hh.account -= spend;
            firm.liquidity += spend;
            firm.revenue += spend;
            firm.inventory -= qty;
            // deposit settlement flow between the two banks
            if (hh.bank != firm.bank) {
                state_.banks[hh.bank].deposit_outflow += spend;
                state_.banks[firm.bank].deposit_outflow -= spend;
            }
        }
        for (auto& firm : state_.firms) {
            firm.last_sales_units = firm.production - firm.inventory;
            firm.sold_out = firm.production > 0.0 && firm.inventory <= 1e-9;
            firm.had_leftover = firm.inventory > 1e-9;
        }
    }

    // Second interbank pass: banks whose own liquidity does not cover the net
    // deposit outflow their customers caused this step borrow the difference.
    void liquidity_pass(StepEvents& ev) {
        for (int b : shuffled_indices(state_.banks.size())) {
            auto& bank = state_.banks[b];
            if (!bank.alive) continue;
            const double need = bank.deposit_outflow - bank.liquidity;
            if (need <= 1e-9) continue;
            interbank_borrow(b, need, cfg_.liquidity_rate_cap, /*require_full=*/false, ev);
        }
    }

    void repayments() {
        const double tau = cfg_.repayment_fraction;
        // firm loans
        for (auto& firm : state_.firms) {
            for (auto& loan : firm.loans) {
                if (loan.outstanding <= 0.0) continue;
                const double principal_due = tau * loan.outstanding;
                const double interest = loan.outstanding * loan.rate_per_step;
                const double due = principal_due + interest;
                const double pay = std::min(due, std::max(0.0, firm.liquidity));
                const double ratio = due > 0.0 ? pay / due : 0.0;
                if (pay + 1e-12 < due) firm.insolvent = true;
                firm.liquidity -= pay;
                auto& bank = state_.banks[loan.bank];
                bank.liquidity += pay;
                bank.capital += interest * ratio;
                firm.interest_paid += interest * ratio;
                loan.outstanding -= principal_due * ratio;
            }
            std::erase_if(firm.loans, [](const FirmLoan& l) { return l.outstanding <= 1e-9; });
        }
        // interbank loans
        state_.interbank.amortize_each([&](const LoanRecord& loan) {
            auto& debtor = state_.banks[loan.debtor];
            auto& creditor = state_.banks[loan.creditor];
            const double principal_due = cfg_.ib_repayment_fraction * loan.principal;
            const double interest = loan.principal * loan.rate;
            const double due = principal_due + interest;
            const double pay = std::min(due, std::max(0.0, debtor.liquidity));
            const double ratio = due > 0.0 ? pay / due : 0.0;
            debtor.liquidity -= pay;
            creditor.liquidity += pay;
            creditor.capital += interest * ratio;
            debtor.capital -= interest * ratio;
            return principal_due * ratio;
        });
    }

    void pay_dividends() {
        for (auto& firm : state_.firms) {
            if (firm.insolvent) continue;
            const double profit = firm.revenue - firm.wage_bill - firm.interest_paid;
            if (profit <= 0.0) continue;
            const double dividend =
                std::min(cfg_.dividend_fraction * profit, std::max(0.0, firm.liquidity));
            firm.liquidity -= dividend;
            state_.households[firm.owner].account += dividend;
        }
    }

    void resolve_firm_bankruptcies(StepEvents& ev) {
        double price_sum = 0.0, demand_sum = 0.0;
        int solvent = 0;
        for (const auto& f : state_.firms) {
            if (f.insolvent) continue;
            price_sum += f.price;
            demand_sum += f.expected_demand;
            ++solvent;
        }
        const double avg_price = solvent > 0 ? price_sum / solvent : 1.0;
        const double avg_demand =
            solvent > 0 ? demand_sum / solvent : cfg_.labor_productivity;

        for (auto& firm : state_.firms) {
            if (!firm.insolvent) continue;
            ++ev.firm_defaults;
            auto& owner = state_.households[firm.owner];
            double debt = 0.0;
            for (const auto& l : firm.loans) debt += l.outstanding;
            if (debt > 0.0) {
                // liquidation mass: firm cash plus the owner's account, capped at debt
                double available = std::max(0.0, firm.liquidity) + std::max(0.0, owner.account);
                const double recovered_total = std::min(available, debt);
                for (const auto& l : firm.loans) {
                    const double share = l.outstanding / debt;
                    const double recovered = recovered_total * share;
                    auto& bank = state_.banks[l.bank];
                    bank.liquidity += recovered;
                    bank.capital -= l.outstanding - recovered;
                }
                double from_firm = std::min(std::max(0.0, firm.liquidity), recovered_total);
                firm.liquidity -= from_firm;
                owner.account -= recovered_total - from_firm;
            }
            // owner restarts the company with zero equity
            owner.account += std::max(0.0, firm.liquidity);
            firm.liquidity = 0.0;
            firm.loans.clear();
            for (int h : firm.workers) state_.households[h].employer = -1;
            firm.workers.clear();
            firm.price = avg_price;
            firm.expected_demand = avg_demand;
            firm.last_sales_units = avg_demand;
            firm.sold_out = false;
            firm.had_leftover = false;
            firm.inventory = 0.0;
            firm.production = 0.0;
            firm.insolvent = false;
        }
    }

    void resolve_bank_cascade(StepEvents& ev) {
        std::vector<int> initial;
        for (int b = 0; b < cfg_.banks; ++b)
            if (state_.banks[b].alive && state_.banks[b].capital < 0.0) initial.push_back(b);
        if (initial.empty()) return;

        // pre-cascade snapshot for the loss observable
        const LiabilityNetwork snapshot = state_.interbank;

        std::vector<bool> alive(cfg_.banks);
        std::vector<double> capital(cfg_.banks);
        for (int b = 0; b < cfg_.banks; ++b) {
            alive[b] = state_.banks[b].alive;
            capital[b] = state_.banks[b].capital;
        }
        CascadeReport report = default_cascade(snapshot, capital, initial, &alive);
        std::vector<bool> defaulted(cfg_.banks, false);
        for (int b : report.defaulted_banks) defaulted[b] = true;

        // apply write-offs to survivors, retire defaulted banks
        for (int j = 0; j < cfg_.banks; ++j) {
            if (defaulted[j] || !state_.banks[j].alive) continue;
            double writeoff = 0.0;
            for (int i = 0; i < cfg_.banks; ++i)
                if (defaulted[i]) writeoff += snapshot.liability(i, j);
            state_.banks[j].capital -= writeoff;
        }
        for (int b : report.defaulted_banks) {
            state_.banks[b].alive = false;
            state_.interbank.write_off_debtor(b);
        }
        // claims held by dead banks are cancelled with them
        std::vector<LoanId> to_drop;
        for (const auto& l : state_.interbank.loans())
            if (defaulted[l.creditor]) to_drop.push_back(l.id);
        for (LoanId id : to_drop) {
            const LoanRecord* l = state_.interbank.find_loan(id);
            if (l) state_.interbank.amortize_loan(id, l->principal);
        }
        for (auto& firm : state_.firms)
            std::erase_if(firm.loans,
                          [&](const FirmLoan& l) { return defaulted[l.bank]; });

        ev.cascade = std::move(report);
    }
};

} // namespace srtlab::abm
