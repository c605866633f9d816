#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "tactful/dataio.hpp"
#include "tactful/errors.hpp"

using namespace tactful;

namespace {

const std::string kHeader =
    "participant_id,group,structure,temperament,truth_excess,truth_virus,said_excess,said_virus\n";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Dataset golden() { return parse_responses_csv(slurp(TACTFUL_TEST_DATA "/golden_responses.csv")); }

std::string parse_error(const std::string& text) {
    try {
        parse_responses_csv(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse a single valid row") {
    const Dataset d = parse_responses_csv(kHeader + "p1,tactful,conjunctive,insecure,1,1,0,1\n");
    REQUIRE(d.records.size() == 1);
    const auto& r = d.records[0];
    CHECK(r.participant_id == "p1");
    CHECK(r.group == Group::tactful);
    CHECK(r.structure == Structure::conjunctive);
    CHECK(r.scenario == Scenario{{true, true}, Temperament::insecure});
    CHECK(r.said == kRevealVirus);
}

TEST_CASE("CRLF line endings are accepted") {
    const Dataset d = parse_responses_csv(
        "participant_id,group,structure,temperament,truth_excess,truth_virus,said_excess,said_virus\r\n"
        "p1,candid,disjunctive,confident,1,0,1,0\r\n");
    REQUIRE(d.records.size() == 1);
    CHECK(d.records[0].said == kRevealExcess);
}

TEST_CASE("parse errors name the row and column") {
    CHECK(parse_error(kHeader + "p1,tactful,conjunctive,insecure,0,0,0,0\n").find("row 2") != std::string::npos);
    CHECK(parse_error(kHeader + "p1,tactful,conjunctive,insecure,1,1,0,1\np2,tactful,conjunctive,insecure,1,2,0,1\n")
              .find("row 3, column truth_virus") != std::string::npos);
    CHECK(parse_error(kHeader + "p1,tactful,conjunctive,nervous,1,1,0,1\n").find("column temperament") !=
          std::string::npos);
    CHECK(parse_error(kHeader + "p1,polite,conjunctive,insecure,1,1,0,1\n").find("column group") != std::string::npos);
    CHECK(parse_error(kHeader + "p1,tactful,conjunctive,insecure,1,1,0\n").find("columns") != std::string::npos);
    CHECK(parse_error(kHeader + "p1,tactful,conjunctive,insecure,1,1,0,1,9\n").find("columns") != std::string::npos);
    CHECK(parse_error(kHeader + " ,tactful,conjunctive,insecure,1,1,0,1\n").find("participant") != std::string::npos);
    CHECK(parse_error("participant_id,group\n").find("row 1") != std::string::npos);
    CHECK(parse_error(kHeader).find("no data") != std::string::npos);
    CHECK_FALSE(parse_error("").empty());
}

TEST_CASE("golden sample file") {
    const Dataset d = golden();
    REQUIRE(d.records.size() == 24);
    CHECK(d.participants() == std::vector<std::string>{"t1", "t2", "c1", "c2"});
    CHECK(d.records[4].scenario.label() == "insecure:10");
    CHECK(d.records[4].said == kRevealNothing);
    CHECK(d.records[6].said == kRevealBoth);  // t2 mentions the absent excess
    CHECK(d.records[23].group == Group::candid);
    CHECK(d.records[23].structure == Structure::disjunctive);
    CHECK(d.records[23].said == kRevealExcess);
}

TEST_CASE("golden proportion table") {
    const Dataset d = golden();
    std::istringstream table(slurp(TACTFUL_TEST_DATA "/golden_proportions.csv"));
    std::string line;
    std::getline(table, line);
    int rows = 0;
    while (std::getline(table, line)) {
        std::istringstream cells(line);
        std::string group, scenario, cell;
        std::getline(cells, group, ',');
        std::getline(cells, scenario, ',');
        const auto props = empirical_proportions(d, parse_group(group));
        const auto& row = props[parse_scenario_label(scenario).index()];
        REQUIRE(row.has_value());
        for (std::size_t u = 0; u < 4; ++u) {
            std::getline(cells, cell, ',');
            CHECK((*row)[u] == std::stod(cell));
        }
        ++rows;
    }
    CHECK(rows == 12);
}

TEST_CASE("empirical proportions") {
    SUBCASE("all reveal-both") {
        Dataset d = golden();
        for (auto& r : d.records) r.said = kRevealBoth;
        for (const auto& row : empirical_proportions(d, Group::tactful)) {
            REQUIRE(row.has_value());
            CHECK((*row)[kRevealBoth.index()] == 1.0);
        }
    }
    SUBCASE("unobserved scenarios are absent and split rows") {
        const Dataset d = parse_responses_csv(kHeader + "a,tactful,conjunctive,insecure,1,1,1,1\n" +
                                              "b,tactful,conjunctive,insecure,1,1,1,0\n");
        const auto props = empirical_proportions(d, Group::tactful);
        const auto idx = parse_scenario_label("insecure:11").index();
        for (std::size_t s = 0; s < 6; ++s) CHECK(props[s].has_value() == (s == idx));
        CHECK(*props[idx] == std::array<double, 4>{0.5, 0.5, 0.0, 0.0});
    }
    SUBCASE("absent group") {
        const Dataset d = parse_responses_csv(kHeader + "a,tactful,conjunctive,insecure,1,1,1,1\n");
        CHECK_THROWS_AS(empirical_proportions(d, Group::candid), DomainError);
    }
}

TEST_CASE("simulate_dataset") {
    ParamSet p;
    p.alpha_social_insecure = 5;
    const Dataset a = simulate_dataset(p, 50, Group::candid, 11);
    const Dataset b = simulate_dataset(p, 50, Group::candid, 11);
    CHECK(a.records == b.records);
    CHECK(a.records.size() == 300);
    CHECK(a.participants().size() == 50);
    CHECK(simulate_dataset(p, 50, Group::candid, 12).records != a.records);
    CHECK_THROWS_AS(simulate_dataset(p, 0, Group::candid, 1), DomainError);

    SUBCASE("a dominant utterance is chosen almost always") {
        ParamSet sharp;
        sharp.alpha_explanandum = 60;
        sharp.alpha_latents = 60;
        const Dataset d = simulate_dataset(sharp, 500, Group::tactful, 5);
        int both = 0;
        for (const auto& r : d.records) both += r.said == kRevealBoth;
        CHECK(both > 0.99 * static_cast<double>(d.records.size()));
    }
}

TEST_CASE("simulated proportions converge to the choice distribution") {
    ParamSet p;
    p.alpha_social_insecure = 5;
    const Dataset d = simulate_dataset(p, 20000, Group::tactful, 2024);
    const auto props = empirical_proportions(d, Group::tactful);
    for (std::size_t s = 0; s < kScenarios.size(); ++s) {
        const auto dist = choice_distribution(p, kScenarios[s]);
        for (std::size_t u = 0; u < 4; ++u) CHECK(std::abs((*props[s])[u] - dist.probs[u]) < 0.02);
    }
}

TEST_CASE("CSV round trip is lossless") {
    ParamSet p;
    p.alpha_social_confident = -1;
    const Dataset d = simulate_dataset(p, 30, Group::tactful, 77);
    std::ostringstream out;
    write_responses_csv(out, d);
    CHECK(parse_responses_csv(out.str()).records == d.records);

    std::ostringstream golden_out;
    write_responses_csv(golden_out, golden());
    CHECK(golden_out.str() == slurp(TACTFUL_TEST_DATA "/golden_responses.csv"));
}

TEST_CASE("parameter files") {
    SUBCASE("defaults round-trip") {
        const ParamSet p;
        CHECK(read_params(params_to_string(p)) == p);
    }
    SUBCASE("arbitrary values round-trip exactly") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            ParamSet p;
            p.prior_excess = 1e-9 + u(gen) * 0.999;
            p.prior_virus = u(gen) * 0.5 + 1e-6;
            p.alpha_explanandum = (u(gen) - 0.5) * 1e3;
            p.alpha_latents = u(gen) / 3.0;
            p.alpha_social_confident = -u(gen) * 1e-7;
            p.alpha_social_insecure = u(gen) * 7;
            p.epsilon = 0.124 * u(gen) + 1e-12;
            p.temperature = 0.1 + u(gen);
            if (i % 2) p.options.counterfactual = CounterfactualMode::interventional;
            if (i % 3 == 0) p.options.latents_condition_on_sick = false;
            if (i % 5 == 0) p.options.table = LikelihoodTable(0.0, 0.1, 0.3, 1.0 / 3.0);
            CHECK(read_params(params_to_string(p)) == p);
        }
    }
    SUBCASE("golden parameter file") {
        const ParamSet p = read_params(slurp(TACTFUL_TEST_DATA "/golden_params.json"));
        CHECK(p.alpha_social_insecure == 5.0);
        CHECK(p.epsilon == 0.001);
    }
    SUBCASE("errors name the key") {
        auto message = [](const std::string& text) -> std::string {
            try {
                read_params(text);
            } catch (const ParseError& e) {
                return e.what();
            }
            return {};
        };
        const std::string without_temp =
            R"({"prior_excess": 0.1, "prior_virus": 0.1, "alpha_explanandum": 1, "alpha_latents": 1,
                "alpha_social_confident": 0, "alpha_social_insecure": 5, "epsilon": 0.001})";
        CHECK(message(without_temp).find("missing required key 'temperature'") != std::string::npos);

        ParamSet p;
        p.prior_excess = 0.5;
        std::string wide = params_to_string(p);
        wide.replace(wide.find("0.5"), 3, "1.5");
        CHECK(message(wide).find("prior_excess") != std::string::npos);

        CHECK(message("{\"prior_excess\": ").find("malformed") != std::string::npos);
        CHECK(message("[1, 2]").find("object") != std::string::npos);
        std::string typo = params_to_string(ParamSet{});
        typo.replace(typo.find("epsilon"), 7, "epsilom");
        CHECK(message(typo).find("epsilom") != std::string::npos);
    }
    SUBCASE("values carry 17 significant digits") {
        ParamSet p;
        p.prior_excess = 0.1;
        CHECK(params_to_string(p).find("0.10000000000000001") != std::string::npos);
    }
}

TEST_CASE("figure export") {
    const Dataset d = golden();
    const ParamSet p = read_params(slurp(TACTFUL_TEST_DATA "/golden_params.json"));

    SUBCASE("golden file") {
        std::ostringstream out;
        export_figure_data(out, p, d, Group::tactful);
        CHECK(out.str() == slurp(TACTFUL_TEST_DATA "/golden_export_tactful.csv"));
    }
    SUBCASE("24 rows for six observed scenarios") {
        CHECK(figure_rows(p, d, Group::candid).size() == 24);
    }
    SUBCASE("a perfect model reproduces the proportions") {
        // All alphas zero gives 0.25 everywhere; data with one of each utterance per scenario matches it.
        ParamSet flat = p;
        flat.alpha_explanandum = flat.alpha_latents = flat.alpha_social_insecure = 0;
        std::string text = kHeader;
        for (const Scenario& s : kScenarios)
            for (Utterance u : kUtterances)
                text += "x," + std::string("tactful,conjunctive,") + std::string(to_string(s.temperament)) + "," +
                        (s.truth.excess ? "1," : "0,") + (s.truth.virus ? "1," : "0,") +
                        (u.reveal_excess ? "1," : "0,") + (u.reveal_virus ? "1\n" : "0\n");
        for (const auto& row : figure_rows(flat, parse_responses_csv(text), Group::tactful)) {
            CHECK(row.empirical == row.model);
        }
    }
}
