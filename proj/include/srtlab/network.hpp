#pragma once

// Liability network core: dense B x B matrix of interbank liabilities plus
// the per-loan ledger it is derived from. Row index is the debtor, column
// index the creditor, i.e. L(i,j) is what bank i owes bank j.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace srtlab {

using LoanId = std::int64_t;

struct LoanRecord {
    LoanId id = 0;
    int debtor = 0;
    int creditor = 0;
    double principal = 0.0;       // outstanding principal, currency units
    double rate = 0.0;            // per-step interest rate
    double srt_paid = 0.0;        // SRT charged at origination
    int origination_step = 0;
};

// Per-bank balance sheet. Only capital and default_probability are required
// by the risk math; the remaining fields mirror the empirical data shape
// and are optional (NaN when absent).
struct BankSheet {
    double capital = 0.0;
    double liquidity = 0.0;
    double total_assets = std::numeric_limits<double>::quiet_NaN();
    double total_liabilities = std::numeric_limits<double>::quiet_NaN();
    double due_from_banks = std::numeric_limits<double>::quiet_NaN();
    double due_to_banks = std::numeric_limits<double>::quiet_NaN();
    double liquid_assets = std::numeric_limits<double>::quiet_NaN();
    double default_probability = 0.0;
};

class LiabilityNetwork {
public:
    static constexpr double kLedgerTol = 1e-9;

    explicit LiabilityNetwork(int n_banks)
        : n_(n_banks), matrix_(static_cast<std::size_t>(n_banks) * n_banks, 0.0) {
        if (n_banks <= 0) throw std::invalid_argument("n_banks must be positive");
    }

    static LiabilityNetwork from_loans(int n_banks, std::vector<LoanRecord> loans) {
        LiabilityNetwork net(n_banks);
        for (auto& l : loans) net.book_loan(l);
        return net;
    }

    int size() const { return n_; }

    double liability(int debtor, int creditor) const {
        check_index(debtor);
        check_index(creditor);
        return matrix_[idx(debtor, creditor)];
    }

    const std::vector<double>& matrix() const { return matrix_; }
    const std::vector<LoanRecord>& loans() const { return loans_; }

    // Sum of all matrix entries, V = sum_ij L_ij.
    double total_volume() const {
        return std::accumulate(matrix_.begin(), matrix_.end(), 0.0);
    }

    // Total liabilities of bank i (row sum).
    double liabilities_of(int i) const {
        check_index(i);
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += matrix_[idx(i, j)];
        return s;
    }

    // Total interbank assets of bank j (column sum).
    double assets_of(int j) const {
        check_index(j);
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += matrix_[idx(i, j)];
        return s;
    }

    // L^(-mn): entry (m,n) zeroed, all loans on that edge dropped.
    LiabilityNetwork remove_liability(int m, int n) const {
        check_index(m);
        check_index(n);
        LiabilityNetwork out = *this;
        out.matrix_[idx(m, n)] = 0.0;
        std::erase_if(out.loans_, [&](const LoanRecord& l) {
            return l.debtor == m && l.creditor == n;
        });
        return out;
    }

    // L^(-k): subtract loan k's principal from its edge, drop it from the ledger.
    LiabilityNetwork without_loan(LoanId k) const {
        auto it = std::find_if(loans_.begin(), loans_.end(),
                               [&](const LoanRecord& l) { return l.id == k; });
        if (it == loans_.end())
            throw std::invalid_argument("unknown loan id " + std::to_string(k));
        LiabilityNetwork out = *this;
        double& entry = out.matrix_[idx(it->debtor, it->creditor)];
        entry -= it->principal;
        if (entry < -kLedgerTol)
            throw std::logic_error("ledger/matrix inconsistency: negative entry after loan removal");
        if (entry < 0.0) entry = 0.0;
        std::erase_if(out.loans_, [&](const LoanRecord& l) { return l.id == k; });
        return out;
    }

    // L^(+k): add a loan to the edge and the ledger.
    LiabilityNetwork with_loan(const LoanRecord& loan) const {
        LiabilityNetwork out = *this;
        out.book_loan(loan);
        return out;
    }

    // In-place booking; used by the ABM which owns its network.
    void book_loan(const LoanRecord& loan) {
        check_index(loan.debtor);
        check_index(loan.creditor);
        if (loan.debtor == loan.creditor)
            throw std::invalid_argument("self-loan rejected");
        if (loan.principal < 0.0)
            throw std::invalid_argument("negative principal");
        if (loan.principal == 0.0) return;
        matrix_[idx(loan.debtor, loan.creditor)] += loan.principal;
        loans_.push_back(loan);
    }

    // In-place amortization of one loan by a principal amount.
    void amortize_loan(LoanId k, double principal_paid) {
        auto it = std::find_if(loans_.begin(), loans_.end(),
                               [&](const LoanRecord& l) { return l.id == k; });
        if (it == loans_.end())
            throw std::invalid_argument("unknown loan id " + std::to_string(k));
        double paid = std::min(principal_paid, it->principal);
        it->principal -= paid;
        double& entry = matrix_[idx(it->debtor, it->creditor)];
        entry = std::max(0.0, entry - paid);
        if (it->principal <= 0.0) loans_.erase(it);
    }

    // Single-pass amortization over the whole ledger. `per_loan` sees each
    // loan and returns the principal paid on it; loans paid down to zero are
    // retired. Equivalent to calling amortize_loan per id but linear in the
    // ledger size instead of quadratic.
    template <class Fn>
    void amortize_each(Fn&& per_loan) {
        bool any_dead = false;
        for (auto& l : loans_) {
            const double paid =
                std::min(per_loan(static_cast<const LoanRecord&>(l)), l.principal);
            if (paid <= 0.0) continue;
            l.principal -= paid;
            double& entry = matrix_[idx(l.debtor, l.creditor)];
            entry = std::max(0.0, entry - paid);
            if (l.principal <= 0.0) any_dead = true;
        }
        if (any_dead)
            std::erase_if(loans_, [](const LoanRecord& l) { return l.principal <= 0.0; });
    }

    // Evaluate `fn` on the network with one extra loan booked, then undo the
    // booking. Avoids copying the ledger for what-if probes.
    template <class Fn>
    auto probe_loan(const LoanRecord& loan, Fn&& fn) {
        book_loan(loan);
        auto result = fn(static_cast<const LiabilityNetwork&>(*this));
        if (loan.principal > 0.0) {
            matrix_[idx(loan.debtor, loan.creditor)] -= loan.principal;
            loans_.pop_back();
        }
        return result;
    }

    // In-place write-off of every liability owed by `debtor` (zero recovery).
    void write_off_debtor(int debtor) {
        check_index(debtor);
        for (int j = 0; j < n_; ++j) matrix_[idx(debtor, j)] = 0.0;
        std::erase_if(loans_, [&](const LoanRecord& l) { return l.debtor == debtor; });
    }

    // Ledger/matrix consistency: every entry equals the sum of its loans.
    bool consistent(double tol = kLedgerTol) const {
        std::vector<double> rebuilt(matrix_.size(), 0.0);
        for (const auto& l : loans_) {
            if (l.debtor == l.creditor || l.principal < 0.0) return false;
            rebuilt[idx(l.debtor, l.creditor)] += l.principal;
        }
        for (std::size_t i = 0; i < matrix_.size(); ++i)
            if (std::abs(rebuilt[i] - matrix_[i]) > tol) return false;
        for (int i = 0; i < n_; ++i)
            if (matrix_[idx(i, i)] != 0.0) return false;
        return true;
    }

    const LoanRecord* find_loan(LoanId k) const {
        auto it = std::find_if(loans_.begin(), loans_.end(),
                               [&](const LoanRecord& l) { return l.id == k; });
        return it == loans_.end() ? nullptr : &*it;
    }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n_ + j;
    }
    void check_index(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("bank index out of range");
    }

    int n_;
    std::vector<double> matrix_;
    std::vector<LoanRecord> loans_;
};

inline double total_volume(const LiabilityNetwork& net) { return net.total_volume(); }

} // namespace srtlab
