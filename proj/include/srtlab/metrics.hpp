#pragma once

// Monte Carlo batch harness and the per-run observables: cascade size,
// total losses, interbank transaction volume at step T, DebtRank samples
// and per-liability marginal effects.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "srtlab/abm/economy.hpp"
#include "srtlab/systemic_loss.hpp"

namespace srtlab {

struct RSample {
    int step = 0;
    std::vector<double> r;
};

struct ScatterPoint {
    double relative_size = 0.0; // L_mn / V
    double marginal_effect = 0.0;
    int step = 0; // sampling step when collected from a run; 0 for ad-hoc scatters
};

struct RunRecord {
    std::uint64_t seed = 0;
    abm::TaxMode mode = abm::TaxMode::None;
    std::optional<abm::CascadeReport> cascade;
    std::optional<double> volume_at_T; // missing when the run ended before T
    int steps_completed = 0;
    bool degenerate = false; // run ended with no bank alive / all markets dead
    double taxes_collected = 0.0;
    std::vector<RSample> r_samples;
    std::vector<ScatterPoint> marginal_points; // at the sample steps

    double cascade_size() const { return cascade ? cascade->cascade_size : 0.0; }
    double total_losses() const { return cascade ? cascade->total_losses : 0.0; }
};

struct Histogram {
    std::vector<double> edges; // size bins+1
    std::vector<std::int64_t> counts;
    bool log_scale = false;

    void fill(const std::vector<double>& xs) {
        for (double x : xs) {
            if (edges.size() < 2) return;
            auto it = std::upper_bound(edges.begin(), edges.end(), x);
            std::size_t bin;
            if (it == edges.begin()) bin = 0;
            else if (it == edges.end()) bin = counts.size() - 1;
            else bin = static_cast<std::size_t>(it - edges.begin()) - 1;
            ++counts[bin];
        }
    }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

// Fixed-width bins in log space; zeros collected into a leading [0,eps) bin.
inline Histogram log_histogram(const std::vector<double>& xs, int bins = 30) {
    Histogram h;
    h.log_scale = true;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (double x : xs)
        if (x > 0.0) {
            if (!any || x < lo) lo = any ? std::min(lo, x) : x;
            hi = std::max(hi, x);
            any = true;
        }
    if (!any) {
        h.edges = {0.0, 1.0};
        h.counts.assign(1, 0);
        for (double x : xs)
            if (x <= 0.0) ++h.counts[0];
        return h;
    }
    const double llo = std::log10(lo), lhi = std::log10(hi * (1.0 + 1e-12));
    const double width = std::max((lhi - llo) / bins, 1e-12);
    h.edges.push_back(0.0);
    for (int b = 0; b <= bins; ++b) h.edges.push_back(std::pow(10.0, llo + b * width));
    h.counts.assign(h.edges.size() - 1, 0);
    h.fill(xs);
    return h;
}

inline Histogram integer_histogram(const std::vector<double>& xs, int max_value) {
    Histogram h;
    for (int v = 0; v <= max_value + 1; ++v) h.edges.push_back(v - 0.5);
    h.counts.assign(h.edges.size() - 1, 0);
    h.fill(xs);
    return h;
}

struct BatchSummary {
    abm::TaxMode mode = abm::TaxMode::None;
    int n_runs = 0;
    int n_cascades = 0;
    int n_degenerate = 0;
    int n_volume_missing = 0;
    Histogram losses_hist;              // unconditional, cascade-free runs at 0
    Histogram losses_hist_conditional;  // cascade runs only
    Histogram cascade_hist;
    Histogram volume_hist;
    std::vector<double> losses;
    std::vector<double> cascade_sizes;
    std::vector<double> volumes;
    std::vector<double> mean_r_by_rank; // banks ordered by DebtRank, most risky first
    std::vector<ScatterPoint> scatter;
};

inline double transaction_volume(const std::vector<abm::StepEvents>& events, int T) {
    double v = 0.0;
    for (const auto& ev : events)
        if (ev.step == T)
            for (const auto& loan : ev.ib_loans) v += loan.principal;
    return v;
}

// One pair (L_mn/V, marginal effect) per nonzero liability.
inline std::vector<ScatterPoint> marginal_scatter(const LiabilityNetwork& net,
                                                  const std::vector<double>& capital,
                                                  const DefaultModel& model,
                                                  ValueWeights weights = ValueWeights::Liabilities) {
    std::vector<ScatterPoint> points;
    const double volume = net.total_volume();
    if (volume <= 0.0) return points;
    for (int m = 0; m < net.size(); ++m)
        for (int n = 0; n < net.size(); ++n) {
            const double l = net.liability(m, n);
            if (l <= 0.0) continue;
            points.push_back(
                {l / volume, marginal_liability_effect(net, capital, model, m, n, weights)});
        }
    return points;
}

inline RunRecord simulate_run(const abm::ModelConfig& cfg, std::uint64_t seed) {
    abm::Simulation sim(cfg, seed);
    RunRecord rec;
    rec.seed = seed;
    rec.mode = cfg.tax_mode;

    std::vector<abm::StepEvents> events;
    events.reserve(cfg.steps);
    for (int t = 0; t < cfg.steps; ++t) {
        const bool sample_now = cfg.sample_every > 0 && t > 0 && t % cfg.sample_every == 0;
        if (sample_now) {
            auto capital = sim.bank_capitals();
            auto profile =
                risk_profile(sim.state().interbank, capital, cfg.value_weights);
            rec.r_samples.push_back({t, profile.r});
            auto pts = marginal_scatter(sim.state().interbank, capital,
                                        sim.default_model(), cfg.value_weights);
            for (auto& p : pts) p.step = t;
            rec.marginal_points.insert(rec.marginal_points.end(), pts.begin(), pts.end());
        }
        auto ev = sim.step();
        rec.taxes_collected += ev.taxes_collected;
        events.push_back(std::move(ev));
        rec.steps_completed = t + 1;
        if (events.back().cascade) rec.cascade = events.back().cascade;
        if (events.back().terminated) break;
    }
    if (rec.steps_completed > cfg.volume_step)
        rec.volume_at_T = transaction_volume(events, cfg.volume_step);
    rec.degenerate = sim.state().terminated && !rec.cascade;
    return rec;
}

inline BatchSummary summarize(const std::vector<RunRecord>& records, int n_banks,
                              int hist_bins = 30) {
    BatchSummary s;
    s.n_runs = static_cast<int>(records.size());
    if (!records.empty()) s.mode = records.front().mode;

    std::vector<double> cond_losses;
    std::vector<std::vector<double>> sorted_r;
    for (const auto& rec : records) {
        if (rec.cascade) {
            ++s.n_cascades;
            cond_losses.push_back(rec.total_losses());
        }
        if (rec.degenerate) ++s.n_degenerate;
        s.losses.push_back(rec.total_losses());
        if (rec.cascade) s.cascade_sizes.push_back(rec.cascade_size());
        if (rec.volume_at_T) s.volumes.push_back(*rec.volume_at_T);
        else ++s.n_volume_missing;
        for (const auto& sample : rec.r_samples) {
            auto r = sample.r;
            std::sort(r.begin(), r.end(), std::greater<>());
            sorted_r.push_back(std::move(r));
        }
        s.scatter.insert(s.scatter.end(), rec.marginal_points.begin(),
                         rec.marginal_points.end());
    }
    s.losses_hist = log_histogram(s.losses, hist_bins);
    s.losses_hist_conditional = log_histogram(cond_losses, hist_bins);
    s.cascade_hist = integer_histogram(s.cascade_sizes, n_banks);
    s.volume_hist = log_histogram(s.volumes, hist_bins);
    s.mean_r_by_rank.assign(n_banks, 0.0);
    if (!sorted_r.empty()) {
        for (const auto& r : sorted_r)
            for (int i = 0; i < n_banks && i < static_cast<int>(r.size()); ++i)
                s.mean_r_by_rank[i] += r[i];
        for (auto& x : s.mean_r_by_rank) x /= static_cast<double>(sorted_r.size());
    }
    return s;
}

// Independent runs with seeds base_seed .. base_seed+n_runs-1, optionally in
// a small worker pool. The seed-indexed merge makes the result independent of
// the worker count.
inline std::vector<RunRecord> run_batch_records(const abm::ModelConfig& cfg, int n_runs,
                                                std::uint64_t base_seed, int workers = 1) {
    std::vector<RunRecord> records(n_runs);
    if (workers <= 1) {
        for (int i = 0; i < n_runs; ++i) records[i] = simulate_run(cfg, base_seed + i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1))
                    records[i] = simulate_run(cfg, base_seed + i);
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

inline BatchSummary run_batch(const abm::ModelConfig& cfg, int n_runs,
                              std::uint64_t base_seed, int workers = 1) {
    return summarize(run_batch_records(cfg, n_runs, base_seed, workers), cfg.banks);
}

inline double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const double pos = p * (xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - lo;
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

inline double median(std::vector<double> xs) { return percentile(std::move(xs), 0.5); }

} // namespace srtlab
