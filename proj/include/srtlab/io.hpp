#pragma once

// File formats: edge/node CSV ingestion matching the empirical data shape,
// model-config JSON with full defaulting, output emission with a metadata
// header block, and a scale-free synthetic fixture generator.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srtlab/abm/config.hpp"
#include "srtlab/metrics.hpp"
#include "srtlab/network.hpp"

namespace srtlab::io {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr double kDefaultPdefEmpirical = 0.025;

struct ParsedNetwork {
    LiabilityNetwork net{1};
    std::vector<BankSheet> sheets;
    std::vector<std::string> bank_ids;

    std::vector<double> capitals() const {
        std::vector<double> c;
        c.reserve(sheets.size());
        for (const auto& s : sheets) c.push_back(s.capital);
        return c;
    }
    std::vector<double> default_probabilities() const {
        std::vector<double> p;
        p.reserve(sheets.size());
        for (const auto& s : sheets) p.push_back(s.default_probability);
        return p;
    }
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& s, const std::string& file, int lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(lineno) + ": malformed number '" + s + "'");
    }
}

// shortest round-trip double formatting
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[32];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            if (std::strtod(shorter, nullptr) == v) return shorter;
        }
    }
    return buf;
}

} // namespace detail

// Node CSV: header bank_id,capital[,total_assets,...,p_def]; edge CSV:
// header debtor_id,creditor_id,amount. '#'-prefixed lines are ignored.
inline ParsedNetwork parse_network(std::istream& edges, std::istream& nodes,
                                   const std::string& edge_name = "edges",
                                   const std::string& node_name = "nodes") {
    ParsedNetwork out;
    std::map<std::string, int> index;

    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(nodes, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = detail::split_csv_line(line);
        if (header.empty()) {
            header = fields;
            if (header.size() < 2 || header[0] != "bank_id" || header[1] != "capital")
                throw ParseError(node_name + ": header must start with bank_id,capital");
            continue;
        }
        if (fields.size() < 2)
            throw ParseError(node_name + ":" + std::to_string(lineno) + ": too few fields");
        const std::string& id = fields[0];
        if (index.count(id))
            throw ParseError(node_name + ":" + std::to_string(lineno) + ": duplicate bank_id " + id);
        BankSheet sheet;
        sheet.default_probability = kDefaultPdefEmpirical;
        for (std::size_t c = 1; c < fields.size() && c < header.size(); ++c) {
            if (fields[c].empty()) continue;
            const double v = detail::parse_double(fields[c], node_name, lineno);
            const std::string& col = header[c];
            if (col == "capital") sheet.capital = v;
            else if (col == "liquidity") sheet.liquidity = v;
            else if (col == "total_assets") sheet.total_assets = v;
            else if (col == "total_liabilities") sheet.total_liabilities = v;
            else if (col == "due_from_banks") sheet.due_from_banks = v;
            else if (col == "due_to_banks") sheet.due_to_banks = v;
            else if (col == "liquid_assets") sheet.liquid_assets = v;
            else if (col == "p_def") sheet.default_probability = v;
            else throw ParseError(node_name + ": unknown column " + col);
        }
        if (sheet.default_probability < 0.0 || sheet.default_probability >= 1.0)
            throw ParseError(node_name + ":" + std::to_string(lineno) + ": p_def outside [0,1)");
        index[id] = static_cast<int>(out.sheets.size());
        out.bank_ids.push_back(id);
        out.sheets.push_back(sheet);
    }
    if (out.sheets.empty()) throw ParseError(node_name + ": no banks");

    out.net = LiabilityNetwork(static_cast<int>(out.sheets.size()));
    lineno = 0;
    bool saw_header = false;
    LoanId next_id = 1;
    while (std::getline(edges, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = detail::split_csv_line(line);
        if (!saw_header) {
            if (fields.size() != 3 || fields[0] != "debtor_id")
                throw ParseError(edge_name + ": header must be debtor_id,creditor_id,amount");
            saw_header = true;
            continue;
        }
        if (fields.size() != 3)
            throw ParseError(edge_name + ":" + std::to_string(lineno) + ": expected 3 fields");
        auto debtor = index.find(fields[0]);
        auto creditor = index.find(fields[1]);
        if (debtor == index.end())
            throw ParseError(edge_name + ":" + std::to_string(lineno) + ": unknown id " + fields[0]);
        if (creditor == index.end())
            throw ParseError(edge_name + ":" + std::to_string(lineno) + ": unknown id " + fields[1]);
        const double amount = detail::parse_double(fields[2], edge_name, lineno);
        if (amount < 0.0)
            throw ParseError(edge_name + ":" + std::to_string(lineno) + ": negative amount");
        if (debtor->second == creditor->second)
            throw ParseError(edge_name + ":" + std::to_string(lineno) + ": self-edge " + fields[0]);
        if (amount == 0.0) continue;
        // each row becomes one synthetic loan; duplicate rows sum on the edge
        out.net.book_loan({next_id++, debtor->second, creditor->second, amount});
    }
    return out;
}

inline ParsedNetwork parse_network_files(const std::string& edge_path,
                                         const std::string& node_path) {
    std::ifstream edges(edge_path);
    if (!edges) throw ParseError("cannot open " + edge_path);
    std::ifstream nodes(node_path);
    if (!nodes) throw ParseError("cannot open " + node_path);
    return parse_network(edges, nodes, edge_path, node_path);
}

// ---- config JSON ------------------------------------------------------

inline nlohmann::json config_to_json(const abm::ModelConfig& c) {
    return {
        {"banks", c.banks},
        {"firms", c.firms},
        {"households", c.households},
        {"steps", c.steps},
        {"tax_mode", abm::to_string(c.tax_mode)},
        {"zeta", c.zeta},
        {"srt_full", c.srt_full},
        {"ftt_rate", c.ftt_rate},
        {"p_def", c.p_def},
        {"discount_rate", c.discount_rate},
        {"steps_per_year", c.steps_per_year},
        {"srt_term_cap_years", c.srt_term_cap_years},
        {"value_weights", to_string(c.value_weights)},
        {"wage", c.wage},
        {"labor_productivity", c.labor_productivity},
        {"consumption_rate", c.consumption_rate},
        {"firms_compared", c.firms_compared},
        {"banks_approached", c.banks_approached},
        {"rate_threshold", c.rate_threshold},
        {"ib_rate_cap", c.ib_rate_cap},
        {"liquidity_rate_cap", c.liquidity_rate_cap},
        {"reduced_loan_fraction", c.reduced_loan_fraction},
        {"repayment_fraction", c.repayment_fraction},
        {"ib_repayment_fraction", c.ib_repayment_fraction},
        {"price_adjust_max", c.price_adjust_max},
        {"demand_adjust_max", c.demand_adjust_max},
        {"dividend_fraction", c.dividend_fraction},
        {"rate_base", c.rate_base},
        {"rate_spread", c.rate_spread},
        {"fragility_premium", c.fragility_premium},
        {"init_household_account", c.init_household_account},
        {"init_firm_liquidity", c.init_firm_liquidity},
        {"init_bank_liquidity", c.init_bank_liquidity},
        {"init_bank_capital", c.init_bank_capital},
        {"init_bank_capital_spread", c.init_bank_capital_spread},
        {"exposure_limit", c.exposure_limit},
        {"stop_on_first_cascade", c.stop_on_first_cascade},
        {"volume_step", c.volume_step},
        {"sample_every", c.sample_every},
    };
}

// Missing keys keep their defaults; unknown keys are rejected.
inline abm::ModelConfig config_from_json(const nlohmann::json& j) {
    abm::ModelConfig c;
    const nlohmann::json known = config_to_json(c);
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw ParseError("unknown config key: " + key);
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("banks", c.banks);
    get("firms", c.firms);
    get("households", c.households);
    get("steps", c.steps);
    if (j.contains("tax_mode")) c.tax_mode = abm::tax_mode_from_string(j.at("tax_mode"));
    get("zeta", c.zeta);
    get("srt_full", c.srt_full);
    get("ftt_rate", c.ftt_rate);
    get("p_def", c.p_def);
    get("discount_rate", c.discount_rate);
    get("steps_per_year", c.steps_per_year);
    get("srt_term_cap_years", c.srt_term_cap_years);
    if (j.contains("value_weights")) {
        const std::string s = j.at("value_weights");
        if (s == "liabilities") c.value_weights = ValueWeights::Liabilities;
        else if (s == "assets") c.value_weights = ValueWeights::Assets;
        else throw ParseError("value_weights must be liabilities or assets");
    }
    get("wage", c.wage);
    get("labor_productivity", c.labor_productivity);
    get("consumption_rate", c.consumption_rate);
    get("firms_compared", c.firms_compared);
    get("banks_approached", c.banks_approached);
    get("rate_threshold", c.rate_threshold);
    get("ib_rate_cap", c.ib_rate_cap);
    get("liquidity_rate_cap", c.liquidity_rate_cap);
    get("reduced_loan_fraction", c.reduced_loan_fraction);
    get("repayment_fraction", c.repayment_fraction);
    get("ib_repayment_fraction", c.ib_repayment_fraction);
    get("price_adjust_max", c.price_adjust_max);
    get("demand_adjust_max", c.demand_adjust_max);
    get("dividend_fraction", c.dividend_fraction);
    get("rate_base", c.rate_base);
    get("rate_spread", c.rate_spread);
    get("fragility_premium", c.fragility_premium);
    get("init_household_account", c.init_household_account);
    get("init_firm_liquidity", c.init_firm_liquidity);
    get("init_bank_liquidity", c.init_bank_liquidity);
    get("init_bank_capital", c.init_bank_capital);
    get("init_bank_capital_spread", c.init_bank_capital_spread);
    get("exposure_limit", c.exposure_limit);
    get("stop_on_first_cascade", c.stop_on_first_cascade);
    get("volume_step", c.volume_step);
    get("sample_every", c.sample_every);
    c.validate();
    return c;
}

// FNV-1a over the canonical serialized config.
inline std::string config_hash(const abm::ModelConfig& c) {
    const std::string dump = config_to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// metadata block emitted at the top of every output file
inline std::string metadata_block(const abm::ModelConfig& cfg, std::uint64_t seed,
                                  const std::string& extra = "") {
    std::string s;
    s += std::string("# version: ") + kVersion + "\n";
    s += "# seed: " + std::to_string(seed) + "\n";
    s += "# config_hash: " + config_hash(cfg) + "\n";
    s += std::string("# value_weights: ") + to_string(cfg.value_weights) + "\n";
    s += std::string("# discounting: continuous, r=") + detail::fmt(cfg.discount_rate) + "\n";
    if (!extra.empty()) s += "# " + extra + "\n";
    return s;
}

// ---- writers ----------------------------------------------------------

inline void write_edges(std::ostream& os, const LiabilityNetwork& net,
                        const std::vector<std::string>& ids) {
    os << "debtor_id,creditor_id,amount\n";
    for (int i = 0; i < net.size(); ++i)
        for (int j = 0; j < net.size(); ++j)
            if (net.liability(i, j) > 0.0)
                os << ids[i] << ',' << ids[j] << ',' << detail::fmt(net.liability(i, j))
                   << '\n';
}

inline void write_nodes(std::ostream& os, const std::vector<BankSheet>& sheets,
                        const std::vector<std::string>& ids) {
    os << "bank_id,capital,liquidity,p_def\n";
    for (std::size_t i = 0; i < sheets.size(); ++i)
        os << ids[i] << ',' << detail::fmt(sheets[i].capital) << ','
           << detail::fmt(sheets[i].liquidity) << ','
           << detail::fmt(sheets[i].default_probability) << '\n';
}

inline nlohmann::json histogram_to_json(const Histogram& h) {
    return {{"edges", h.edges}, {"counts", h.counts}, {"log_scale", h.log_scale}};
}

inline nlohmann::json summary_to_json(const BatchSummary& s) {
    return {
        {"mode", abm::to_string(s.mode)},
        {"n_runs", s.n_runs},
        {"n_cascades", s.n_cascades},
        {"n_degenerate", s.n_degenerate},
        {"n_volume_missing", s.n_volume_missing},
        {"losses_hist", histogram_to_json(s.losses_hist)},
        {"losses_hist_conditional", histogram_to_json(s.losses_hist_conditional)},
        {"cascade_hist", histogram_to_json(s.cascade_hist)},
        {"volume_hist", histogram_to_json(s.volume_hist)},
        {"mean_r_by_rank", s.mean_r_by_rank},
    };
}

inline void write_run_records(std::ostream& os, const std::vector<RunRecord>& records,
                              const abm::ModelConfig& cfg, std::uint64_t base_seed) {
    os << metadata_block(cfg, base_seed, std::string("mode: ") + abm::to_string(cfg.tax_mode));
    os << "seed,mode,steps_completed,cascade_size,total_losses,volume_at_T,volume_missing,"
          "degenerate,taxes_collected\n";
    for (const auto& r : records) {
        os << r.seed << ',' << abm::to_string(r.mode) << ',' << r.steps_completed << ','
           << detail::fmt(r.cascade_size()) << ',' << detail::fmt(r.total_losses()) << ','
           << (r.volume_at_T ? detail::fmt(*r.volume_at_T) : std::string("")) << ','
           << (r.volume_at_T ? 0 : 1) << ',' << (r.degenerate ? 1 : 0) << ','
           << detail::fmt(r.taxes_collected) << '\n';
    }
}

// ---- synthetic fixture generator --------------------------------------

struct FixtureParams {
    int banks = 50;
    int edges_per_bank = 3;
    double exposure_tail = 1.5;  // Pareto tail exponent for liability sizes
    double exposure_min = 1.0;
    double capital_ratio = 0.2;  // capital relative to interbank assets
    double p_def = kDefaultPdefEmpirical;
};

// Scale-free liability network via preferential attachment, exposures drawn
// from a Pareto tail.
inline ParsedNetwork generate_fixture(const FixtureParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int n = params.banks;
    if (n < 3) throw std::invalid_argument("need at least 3 banks");

    std::vector<int> degree(n, 0);
    LiabilityNetwork net(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto exposure = [&] {
        return params.exposure_min * std::pow(1.0 - u(rng), -1.0 / params.exposure_tail);
    };
    LoanId next_id = 1;
    auto link = [&](int a, int b) {
        if (a == b) return;
        // random direction
        if (u(rng) < 0.5) std::swap(a, b);
        net.book_loan({next_id++, a, b, exposure()});
        ++degree[a];
        ++degree[b];
    };

    link(0, 1);
    link(1, 2);
    link(2, 0);
    for (int v = 3; v < n; ++v) {
        for (int e = 0; e < params.edges_per_bank; ++e) {
            // preferential attachment by total degree
            int total = 0;
            for (int w = 0; w < v; ++w) total += degree[w];
            std::uniform_int_distribution<int> pick(0, std::max(0, total - 1));
            int ticket = pick(rng);
            int target = 0;
            for (int w = 0; w < v; ++w) {
                ticket -= degree[w];
                if (ticket < 0) {
                    target = w;
                    break;
                }
            }
            link(v, target);
        }
    }

    ParsedNetwork out;
    out.net = net;
    out.sheets.resize(n);
    out.bank_ids.resize(n);
    std::uniform_real_distribution<double> cap_noise(0.5, 1.5);
    for (int i = 0; i < n; ++i) {
        out.bank_ids[i] = "B" + std::to_string(i);
        auto& sheet = out.sheets[i];
        const double assets = net.assets_of(i);
        const double liabs = net.liabilities_of(i);
        sheet.capital = std::max(params.exposure_min,
                                 params.capital_ratio * assets * cap_noise(rng));
        sheet.liquidity = 0.5 * sheet.capital;
        sheet.total_assets = assets + sheet.capital;
        sheet.total_liabilities = liabs;
        sheet.due_from_banks = assets;
        sheet.due_to_banks = liabs;
        sheet.liquid_assets = sheet.liquidity;
        sheet.default_probability = params.p_def;
    }
    return out;
}

} // namespace srtlab::io
