#pragma once

// Response data, parameter files and figure-data export.
//
// Response CSV header:
//   participant_id,group,structure,temperament,truth_excess,truth_virus,said_excess,said_virus
// Parameter file: a flat JSON object keyed by the ParamSet field names.
// Figure CSV header:
//   scenario,utterance,empirical,model

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tactful/explainer.hpp"

namespace tactful {

enum class Group { tactful, candid };
enum class Structure { conjunctive, disjunctive };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);
std::string_view to_string(Structure s);
Structure parse_structure(std::string_view s);

struct ResponseRecord {
    std::string participant_id;
    Group group = Group::tactful;
    Structure structure = Structure::conjunctive;  // kept for provenance only
    Scenario scenario;
    Utterance said;

    friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct Dataset {
    std::vector<ResponseRecord> records;
    std::string provenance;

    bool has_group(Group g) const;
    // Participant ids in order of first appearance.
    std::vector<std::string> participants() const;
};

Dataset parse_responses_csv(std::istream& in, std::string provenance = {});
Dataset parse_responses_csv(std::string_view text, std::string provenance = {});
void write_responses_csv(std::ostream& out, const Dataset& data);

// Records of one group; throws DomainError if the group is absent.
Dataset filter_group(const Dataset& data, Group g);

// Response counts per scenario (kScenarios order) and utterance (kUtterances order).
struct ResponseCounts {
    std::array<std::array<std::uint64_t, 4>, 6> counts{};

    std::uint64_t total() const;
    std::uint64_t scenario_total(std::size_t s) const;
};

// Throws DomainError if a record's scenario is not one of kScenarios.
ResponseCounts count_responses(const Dataset& data);

// Rows for unobserved scenarios are absent (nullopt).
using ProportionTable = std::array<std::optional<std::array<double, 4>>, 6>;

ProportionTable empirical_proportions(const Dataset& data, Group g);
ProportionTable empirical_proportions(const ResponseCounts& counts);

// Every participant answers all six scenarios; utterances are drawn from
// choice_distribution. Participant ids are "sim0001", "sim0002", ...
Dataset simulate_dataset(const ParamSet& params, int n_participants, Group group, std::uint64_t seed);

// Keys in ParamSet field order, values with 17 significant digits.
void write_params(std::ostream& out, const ParamSet& params);
std::string params_to_string(const ParamSet& params);
// Throws ParseError naming the missing, malformed or out-of-range key.
ParamSet read_params(std::istream& in);
ParamSet read_params(std::string_view text);

struct FigureRow {
    std::string scenario;
    std::string utterance;
    double empirical = 0.0;
    double model = 0.0;
};

// One row per observed scenario x utterance cell.
std::vector<FigureRow> figure_rows(const ParamSet& params, const Dataset& data, Group g);
void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows);
void export_figure_data(std::ostream& out, const ParamSet& params, const Dataset& data, Group g);

}  // namespace tactful
