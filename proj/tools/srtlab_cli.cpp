// Command line front end: network analytics (debtrank, marginal, quote),
// synthetic fixtures, and the simulation batch driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "srtlab/debtrank.hpp"
#include "srtlab/io.hpp"
#include "srtlab/metrics.hpp"
#include "srtlab/systemic_loss.hpp"

namespace {

using namespace srtlab;

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open " + path);
    return file;
}

abm::ModelConfig load_config(const std::string& path) {
    if (path.empty()) return abm::ModelConfig{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return io::config_from_json(j);
}

ValueWeights parse_weights(const std::string& s) {
    if (s == "liabilities") return ValueWeights::Liabilities;
    if (s == "assets") return ValueWeights::Assets;
    throw std::runtime_error("weights must be liabilities or assets");
}

struct NetworkArgs {
    std::string edges;
    std::string nodes;
    std::string weights = "liabilities";
    double discount_rate = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--edges", edges, "edge CSV (debtor_id,creditor_id,amount)")
            ->required();
        cmd->add_option("--nodes", nodes, "node CSV (bank_id,capital[,...])")->required();
        cmd->add_option("--weights", weights, "economic value weighting")
            ->check(CLI::IsMember({"liabilities", "assets"}));
        cmd->add_option("--discount-rate", discount_rate, "continuous discount rate");
    }

    io::ParsedNetwork load() const { return io::parse_network_files(edges, nodes); }
    DefaultModel model(const io::ParsedNetwork& p) const {
        return DefaultModel::from_probabilities(p.default_probabilities(), discount_rate);
    }
};

int cmd_debtrank(const NetworkArgs& args, const std::string& out_path) {
    auto parsed = args.load();
    auto weights = parse_weights(args.weights);
    auto profile = risk_profile(parsed.net, parsed.capitals(), weights);
    auto model = args.model(parsed);

    std::ofstream file;
    auto& os = open_output(file, out_path);
    os << "# version: " << io::kVersion << "\n";
    os << "# value_weights: " << to_string(weights) << "\n";
    os << "bank_id,debtrank,economic_value,expected_loss\n";
    for (int i = 0; i < parsed.net.size(); ++i)
        os << parsed.bank_ids[i] << ',' << io::detail::fmt(profile.r[i]) << ','
           << io::detail::fmt(profile.values.v[i]) << ','
           << io::detail::fmt(expected_loss_node(profile, model, i)) << '\n';
    return 0;
}

int cmd_marginal(const NetworkArgs& args, const std::string& out_path) {
    auto parsed = args.load();
    auto weights = parse_weights(args.weights);
    auto model = args.model(parsed);
    const double volume = parsed.net.total_volume();

    std::ofstream file;
    auto& os = open_output(file, out_path);
    os << "# version: " << io::kVersion << "\n";
    os << "# value_weights: " << args.weights << "\n";
    os << "debtor_id,creditor_id,amount,relative_size,marginal_effect\n";
    for (int m = 0; m < parsed.net.size(); ++m)
        for (int n = 0; n < parsed.net.size(); ++n) {
            const double amount = parsed.net.liability(m, n);
            if (amount == 0.0) continue;
            const double effect = marginal_liability_effect(parsed.net, parsed.capitals(),
                                                            model, m, n, weights);
            os << parsed.bank_ids[m] << ',' << parsed.bank_ids[n] << ','
               << io::detail::fmt(amount) << ',' << io::detail::fmt(amount / volume) << ','
               << io::detail::fmt(effect) << '\n';
        }
    return 0;
}

struct QuoteArgs {
    std::string debtor;
    std::string creditor;
    double principal = 0.0;
    double term_years = 1.0;
    double zeta = 1.0;
};

int cmd_quote(const NetworkArgs& args, const QuoteArgs& q, const std::string& out_path) {
    auto parsed = args.load();
    auto weights = parse_weights(args.weights);
    auto model = args.model(parsed);

    int debtor = -1, creditor = -1;
    for (int i = 0; i < parsed.net.size(); ++i) {
        if (parsed.bank_ids[i] == q.debtor) debtor = i;
        if (parsed.bank_ids[i] == q.creditor) creditor = i;
    }
    if (debtor < 0) throw std::runtime_error("unknown debtor id " + q.debtor);
    if (creditor < 0) throw std::runtime_error("unknown creditor id " + q.creditor);

    LoanRecord loan{0, debtor, creditor, q.principal};
    auto quote = srt_quote(parsed.net, parsed.capitals(), model, loan, q.term_years,
                           q.zeta, weights);

    nlohmann::json j{
        {"version", io::kVersion},
        {"debtor", q.debtor},
        {"creditor", q.creditor},
        {"principal", quote.principal},
        {"term_years", quote.term_years},
        {"zeta", quote.zeta},
        {"tax", quote.tax},
        {"delta_r", quote.delta_r},
    };
    std::ofstream file;
    open_output(file, out_path) << j.dump(2) << '\n';
    return 0;
}

struct FixtureArgs {
    io::FixtureParams params;
    std::uint64_t seed = 1;
    std::string edges = "edges.csv";
    std::string nodes = "nodes.csv";
};

int cmd_fixture(const FixtureArgs& args) {
    auto fx = io::generate_fixture(args.params, args.seed);
    std::ofstream edges(args.edges), nodes(args.nodes);
    if (!edges || !nodes) throw std::runtime_error("cannot open output files");
    io::write_edges(edges, fx.net, fx.bank_ids);
    io::write_nodes(nodes, fx.sheets, fx.bank_ids);
    return 0;
}

struct SimulateArgs {
    std::string config;
    std::string mode;
    int runs = 1;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string records_path;
    std::string summary_path;
};

int cmd_simulate(const SimulateArgs& args) {
    auto cfg = load_config(args.config);
    if (!args.mode.empty()) cfg.tax_mode = abm::tax_mode_from_string(args.mode);
    auto records = run_batch_records(cfg, args.runs, args.seed, args.workers);
    auto summary = summarize(records, cfg.banks);
    summary.mode = cfg.tax_mode;

    if (!args.records_path.empty()) {
        std::ofstream out(args.records_path);
        if (!out) throw std::runtime_error("cannot open " + args.records_path);
        io::write_run_records(out, records, cfg, args.seed);
    }
    nlohmann::json j = io::summary_to_json(summary);
    j["config_hash"] = io::config_hash(cfg);
    j["base_seed"] = args.seed;
    std::ofstream file;
    open_output(file, args.summary_path) << j.dump(2) << '\n';
    return 0;
}

int cmd_compare(const SimulateArgs& args) {
    auto base = load_config(args.config);
    nlohmann::json out{{"version", io::kVersion},
                       {"config_hash", io::config_hash(base)},
                       {"base_seed", args.seed},
                       {"n_runs", args.runs}};
    for (abm::TaxMode mode : {abm::TaxMode::None, abm::TaxMode::Srt, abm::TaxMode::Ftt}) {
        auto cfg = base;
        cfg.tax_mode = mode;
        auto records = run_batch_records(cfg, args.runs, args.seed, args.workers);
        auto s = summarize(records, cfg.banks);
        double max_cascade = 0.0;
        for (double c : s.cascade_sizes) max_cascade = std::max(max_cascade, c);
        std::vector<double> abs_marginal;
        for (const auto& r : records)
            for (const auto& p : r.marginal_points)
                abs_marginal.push_back(std::abs(p.marginal_effect));
        out[abm::to_string(mode)] = {
            {"n_cascades", s.n_cascades},
            {"loss_p95", s.losses.empty() ? 0.0 : percentile(s.losses, 0.95)},
            {"loss_median", s.losses.empty() ? 0.0 : median(s.losses)},
            {"max_cascade", max_cascade},
            {"volume_median", s.volumes.empty() ? 0.0 : median(s.volumes)},
            {"marginal_abs_median", abs_marginal.empty() ? 0.0 : median(abs_marginal)},
        };
    }
    std::ofstream file;
    open_output(file, args.summary_path) << out.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"systemic risk laboratory"};
    app.require_subcommand(1);

    NetworkArgs net_args;
    std::string out_path;

    auto* debtrank = app.add_subcommand("debtrank", "per-bank DebtRank and expected loss");
    net_args.attach(debtrank);
    debtrank->add_option("-o,--output", out_path, "output file (default stdout)");

    NetworkArgs marg_args;
    std::string marg_out;
    auto* marginal = app.add_subcommand("marginal", "per-liability marginal loss effects");
    marg_args.attach(marginal);
    marginal->add_option("-o,--output", marg_out, "output file (default stdout)");

    NetworkArgs quote_net;
    QuoteArgs quote_args;
    std::string quote_out;
    auto* quote = app.add_subcommand("quote", "tax quote for a prospective loan");
    quote_net.attach(quote);
    quote->add_option("--debtor", quote_args.debtor, "borrowing bank id")->required();
    quote->add_option("--creditor", quote_args.creditor, "lending bank id")->required();
    quote->add_option("--principal", quote_args.principal, "loan principal")->required();
    quote->add_option("--term", quote_args.term_years, "maturity in years");
    quote->add_option("--zeta", quote_args.zeta, "tax scale in (0,1]");
    quote->add_option("-o,--output", quote_out, "output file (default stdout)");

    FixtureArgs fix;
    auto* fixture = app.add_subcommand("fixture", "generate a synthetic network");
    fixture->add_option("--banks", fix.params.banks, "number of banks");
    fixture->add_option("--edges-per-bank", fix.params.edges_per_bank, "attachment edges");
    fixture->add_option("--capital-ratio", fix.params.capital_ratio, "capital / interbank assets");
    fixture->add_option("--p-def", fix.params.p_def, "annual default probability");
    fixture->add_option("--seed", fix.seed, "rng seed");
    fixture->add_option("--edges", fix.edges, "edge CSV path");
    fixture->add_option("--nodes", fix.nodes, "node CSV path");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a simulation batch");
    simulate->add_option("--config", sim.config, "model config JSON");
    simulate->add_option("--mode", sim.mode, "tax mode override")
        ->check(CLI::IsMember({"none", "srt", "ftt"}));
    simulate->add_option("--runs", sim.runs, "number of runs");
    simulate->add_option("--seed", sim.seed, "base seed");
    simulate->add_option("--workers", sim.workers, "worker threads");
    simulate->add_option("--records", sim.records_path, "per-run CSV path");
    simulate->add_option("-o,--output", sim.summary_path, "summary JSON (default stdout)");

    SimulateArgs cmp;
    auto* compare = app.add_subcommand("compare", "run all three tax modes on shared seeds");
    compare->add_option("--config", cmp.config, "model config JSON");
    compare->add_option("--runs", cmp.runs, "runs per mode");
    compare->add_option("--seed", cmp.seed, "base seed");
    compare->add_option("--workers", cmp.workers, "worker threads");
    compare->add_option("-o,--output", cmp.summary_path, "comparison JSON (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (debtrank->parsed()) return cmd_debtrank(net_args, out_path);
        if (marginal->parsed()) return cmd_marginal(marg_args, marg_out);
        if (quote->parsed()) return cmd_quote(quote_net, quote_args, quote_out);
        if (fixture->parsed()) return cmd_fixture(fix);
        if (simulate->parsed()) return cmd_simulate(sim);
        if (compare->parsed()) return cmd_compare(cmp);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
