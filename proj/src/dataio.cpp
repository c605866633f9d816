#include "tactful/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "tactful/errors.hpp"
#include "tactful/random.hpp"

namespace tactful {

namespace {

constexpr std::array<std::string_view, 8> kCsvColumns = {
    "participant_id", "group", "structure", "temperament", "truth_excess", "truth_virus", "said_excess", "said_virus"};

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

[[noreturn]] void fail_at(std::size_t row, std::string_view column, const std::string& what) {
    throw ParseError("row " + std::to_string(row) + ", column " + std::string(column) + ": " + what);
}

bool parse_bit(const std::string& cell, std::size_t row, std::string_view column) {
    if (cell == "0") return false;
    if (cell == "1") return true;
    fail_at(row, column, "expected 0 or 1, got '" + cell + "'");
}

std::string format_double(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

}  // namespace

std::string_view to_string(Group g) { return g == Group::tactful ? "tactful" : "candid"; }

Group parse_group(std::string_view s) {
    if (s == "tactful") return Group::tactful;
    if (s == "candid") return Group::candid;
    throw DomainError("unknown group '" + std::string(s) + "'");
}

std::string_view to_string(Structure s) { return s == Structure::conjunctive ? "conjunctive" : "disjunctive"; }

Structure parse_structure(std::string_view s) {
    if (s == "conjunctive") return Structure::conjunctive;
    if (s == "disjunctive") return Structure::disjunctive;
    throw DomainError("unknown structure '" + std::string(s) + "'");
}

bool Dataset::has_group(Group g) const {
    for (const auto& r : records) {
        if (r.group == g) return true;
    }
    return false;
}

std::vector<std::string> Dataset::participants() const {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (seen.insert(r.participant_id).second) ids.push_back(r.participant_id);
    }
    return ids;
}

Dataset parse_responses_csv(std::istream& in, std::string provenance) {
    Dataset data;
    data.provenance = std::move(provenance);
    std::string line;
    std::size_t row = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line()) throw ParseError("row 1: missing header");
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const auto header = split_commas(line);
    if (header.size() != kCsvColumns.size()) {
        throw ParseError("row 1: header has " + std::to_string(header.size()) + " columns, expected " +
                         std::to_string(kCsvColumns.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] != kCsvColumns[i]) {
            fail_at(1, kCsvColumns[i], "header mismatch, found '" + header[i] + "'");
        }
    }

    while (next_line()) {
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != kCsvColumns.size()) {
            throw ParseError("row " + std::to_string(row) + ": " + std::to_string(cells.size()) +
                             " columns, expected " + std::to_string(kCsvColumns.size()));
        }
        ResponseRecord r;
        r.participant_id = cells[0];
        if (r.participant_id.find_first_not_of(" \t") == std::string::npos) {
            fail_at(row, kCsvColumns[0], "blank participant id");
        }
        try {
            r.group = parse_group(cells[1]);
        } catch (const DomainError& e) {
            fail_at(row, kCsvColumns[1], e.what());
        }
        try {
            r.structure = parse_structure(cells[2]);
        } catch (const DomainError& e) {
            fail_at(row, kCsvColumns[2], e.what());
        }
        try {
            r.scenario.temperament = parse_temperament(cells[3]);
        } catch (const DomainError& e) {
            fail_at(row, kCsvColumns[3], e.what());
        }
        r.scenario.truth.excess = parse_bit(cells[4], row, kCsvColumns[4]);
        r.scenario.truth.virus = parse_bit(cells[5], row, kCsvColumns[5]);
        r.said.reveal_excess = parse_bit(cells[6], row, kCsvColumns[6]);
        r.said.reveal_virus = parse_bit(cells[7], row, kCsvColumns[7]);
        if (!r.scenario.truth.excess && !r.scenario.truth.virus) {
            fail_at(row, "truth_excess/truth_virus", "truth (0,0): a sick patient has at least one cause");
        }
        data.records.push_back(std::move(r));
    }
    if (data.records.empty()) throw ParseError("no data rows");
    return data;
}

Dataset parse_responses_csv(std::string_view text, std::string provenance) {
    std::istringstream in{std::string(text)};
    return parse_responses_csv(in, std::move(provenance));
}

void write_responses_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
    out << '\n';
    for (const auto& r : data.records) {
        out << r.participant_id << ',' << to_string(r.group) << ',' << to_string(r.structure) << ','
            << to_string(r.scenario.temperament) << ',' << int(r.scenario.truth.excess) << ','
            << int(r.scenario.truth.virus) << ',' << int(r.said.reveal_excess) << ',' << int(r.said.reveal_virus)
            << '\n';
    }
}

Dataset filter_group(const Dataset& data, Group g) {
    Dataset out;
    out.provenance = data.provenance.empty() ? "group=" + std::string(to_string(g))
                                             : data.provenance + "; group=" + std::string(to_string(g));
    for (const auto& r : data.records) {
        if (r.group == g) out.records.push_back(r);
    }
    if (out.records.empty()) throw DomainError("group '" + std::string(to_string(g)) + "' not present in data");
    return out;
}

std::uint64_t ResponseCounts::total() const {
    std::uint64_t n = 0;
    for (std::size_t s = 0; s < counts.size(); ++s) n += scenario_total(s);
    return n;
}

std::uint64_t ResponseCounts::scenario_total(std::size_t s) const {
    const auto& row = counts[s];
    return row[0] + row[1] + row[2] + row[3];
}

ResponseCounts count_responses(const Dataset& data) {
    ResponseCounts c;
    for (const auto& r : data.records) ++c.counts[r.scenario.index()][r.said.index()];
    return c;
}

ProportionTable empirical_proportions(const ResponseCounts& counts) {
    ProportionTable table;
    for (std::size_t s = 0; s < counts.counts.size(); ++s) {
        const auto n = counts.scenario_total(s);
        if (n == 0) continue;
        std::array<double, 4> row{};
        for (std::size_t u = 0; u < 4; ++u) row[u] = static_cast<double>(counts.counts[s][u]) / static_cast<double>(n);
        table[s] = row;
    }
    return table;
}

ProportionTable empirical_proportions(const Dataset& data, Group g) {
    return empirical_proportions(count_responses(filter_group(data, g)));
}

Dataset simulate_dataset(const ParamSet& params, int n_participants, Group group, std::uint64_t seed) {
    if (n_participants < 1) throw DomainError("n_participants must be at least 1");
    params.validate();

    std::array<ChoiceDistribution, 6> dists;
    for (std::size_t s = 0; s < kScenarios.size(); ++s) dists[s] = choice_distribution(params, kScenarios[s]);

    Dataset data;
    data.provenance = "simulated; seed=" + std::to_string(seed) + "; n=" + std::to_string(n_participants);
    data.records.reserve(static_cast<std::size_t>(n_participants) * kScenarios.size());
    char id[32];
    for (int p = 0; p < n_participants; ++p) {
        Rng rng(seed, static_cast<std::uint64_t>(p));
        std::snprintf(id, sizeof id, "sim%04d", p + 1);
        const Structure structure = p % 2 == 0 ? Structure::conjunctive : Structure::disjunctive;
        for (std::size_t s = 0; s < kScenarios.size(); ++s) {
            const double draw = rng.uniform();
            std::size_t pick = 3;
            double cumulative = 0.0;
            for (std::size_t u = 0; u < 4; ++u) {
                cumulative += dists[s].probs[u];
                if (draw < cumulative) {
                    pick = u;
                    break;
                }
            }
            data.records.push_back({id, group, structure, kScenarios[s], kUtterances[pick]});
        }
    }
    return data;
}

void write_params(std::ostream& out, const ParamSet& params) {
    const ParamSet defaults;
    out << "{\n";
    auto field = [&](std::string_view key, const std::string& value, bool last = false) {
        out << "  \"" << key << "\": " << value << (last ? "\n" : ",\n");
    };
    const bool has_cf = params.options.counterfactual != defaults.options.counterfactual;
    const bool has_lat = params.options.latents_condition_on_sick != defaults.options.latents_condition_on_sick;
    const bool has_table = params.options.table.has_value();
    field("prior_excess", format_double(params.prior_excess, 17));
    field("prior_virus", format_double(params.prior_virus, 17));
    field("alpha_explanandum", format_double(params.alpha_explanandum, 17));
    field("alpha_latents", format_double(params.alpha_latents, 17));
    field("alpha_social_confident", format_double(params.alpha_social_confident, 17));
    field("alpha_social_insecure", format_double(params.alpha_social_insecure, 17));
    field("epsilon", format_double(params.epsilon, 17));
    field("temperature", format_double(params.temperature, 17), !has_cf && !has_lat && !has_table);
    if (has_cf) {
        field("counterfactual_mode", "\"" + std::string(to_string(params.options.counterfactual)) + "\"",
              !has_lat && !has_table);
    }
    if (has_lat) field("latents_condition_on_sick", params.options.latents_condition_on_sick ? "true" : "false",
                       !has_table);
    if (has_table) {
        const auto& t = *params.options.table;
        field("p00", format_double(t.p00(), 17));
        field("p10", format_double(t.p10(), 17));
        field("p01", format_double(t.p01(), 17));
        field("p11", format_double(t.p11(), 17), true);
    }
    out << "}\n";
}

std::string params_to_string(const ParamSet& params) {
    std::ostringstream os;
    write_params(os, params);
    return os.str();
}

ParamSet read_params(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed parameter file: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("parameter file must be a JSON object");

    static const std::unordered_set<std::string> known = {
        "prior_excess", "prior_virus", "alpha_explanandum", "alpha_latents", "alpha_social_confident",
        "alpha_social_insecure", "epsilon", "temperature", "counterfactual_mode", "latents_condition_on_sick",
        "p00", "p10", "p01", "p11"};
    for (const auto& [key, _] : doc.items()) {
        if (!known.contains(key)) throw ParseError("unknown key '" + key + "'");
    }

    auto number = [&](const char* key) -> double {
        const auto it = doc.find(key);
        if (it == doc.end()) throw ParseError(std::string("missing required key '") + key + "'");
        if (!it->is_number()) throw ParseError(std::string("key '") + key + "' must be a number");
        return it->get<double>();
    };

    ParamSet p;
    p.prior_excess = number("prior_excess");
    p.prior_virus = number("prior_virus");
    p.alpha_explanandum = number("alpha_explanandum");
    p.alpha_latents = number("alpha_latents");
    p.alpha_social_confident = number("alpha_social_confident");
    p.alpha_social_insecure = number("alpha_social_insecure");
    p.epsilon = number("epsilon");
    p.temperature = number("temperature");

    if (const auto it = doc.find("counterfactual_mode"); it != doc.end()) {
        if (!it->is_string()) throw ParseError("key 'counterfactual_mode' must be a string");
        try {
            p.options.counterfactual = parse_counterfactual_mode(it->get<std::string>());
        } catch (const DomainError& e) {
            throw ParseError(std::string("key 'counterfactual_mode': ") + e.what());
        }
    }
    if (const auto it = doc.find("latents_condition_on_sick"); it != doc.end()) {
        if (!it->is_boolean()) throw ParseError("key 'latents_condition_on_sick' must be true or false");
        p.options.latents_condition_on_sick = it->get<bool>();
    }
    const int table_keys = int(doc.contains("p00")) + int(doc.contains("p10")) + int(doc.contains("p01")) +
                           int(doc.contains("p11"));
    if (table_keys != 0) {
        if (table_keys != 4) throw ParseError("likelihood table needs all of 'p00', 'p10', 'p01', 'p11'");
        try {
            p.options.table = LikelihoodTable(number("p00"), number("p10"), number("p01"), number("p11"));
        } catch (const DomainError& e) {
            throw ParseError(std::string("likelihood table: ") + e.what());
        }
    }

    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("out of range: ") + e.what());
    }
    return p;
}

ParamSet read_params(std::string_view text) {
    std::istringstream in{std::string(text)};
    return read_params(in);
}

std::vector<FigureRow> figure_rows(const ParamSet& params, const Dataset& data, Group g) {
    const ProportionTable props = empirical_proportions(data, g);
    std::vector<FigureRow> rows;
    for (std::size_t s = 0; s < kScenarios.size(); ++s) {
        if (!props[s]) continue;
        const ChoiceDistribution dist = choice_distribution(params, kScenarios[s]);
        for (std::size_t u = 0; u < 4; ++u) {
            rows.push_back({kScenarios[s].label(), std::string(kUtterances[u].label()), (*props[s])[u], dist.probs[u]});
        }
    }
    return rows;
}

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows) {
    out << "scenario,utterance,empirical,model\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.empirical, r.model);
        out << r.scenario << ',' << r.utterance << ',' << buf << '\n';
    }
}

void export_figure_data(std::ostream& out, const ParamSet& params, const Dataset& data, Group g) {
    write_figure_csv(out, figure_rows(params, data, g));
}

}  // namespace tactful
