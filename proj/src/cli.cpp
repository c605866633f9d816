#include "tactful/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "tactful/dataio.hpp"
#include "tactful/errors.hpp"
#include "tactful/explainer.hpp"
#include "tactful/fit.hpp"
#include "tactful/stats.hpp"

namespace tactful::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreliableResult : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path + "'");
}

// Flags shared across subcommands. Each subcommand registers the subset it uses.
struct Options {
    std::string data;
    std::string group = "tactful";
    std::string params;
    std::string out;
    std::uint64_t seed = 0;
    int restarts = 20;
    double l1 = 0.005;
    int reps = 200;
    std::optional<double> epsilon;
    std::string cf_mode;

    std::string scenario;
    std::string ablation = "full";
    std::string ablations = "regret,latents,regret+latents,explanandum";
    std::string statistic = "r2";
    double confidence = 0.95;
    int n = 0;
    int max_iterations = 5000;
};

ParamSet load_params(const Options& o) {
    ParamSet p;
    try {
        p = read_params(read_file(o.params));
    } catch (const ParseError& e) {
        throw InputError(o.params + ": " + e.what());
    }
    if (o.epsilon) p.epsilon = *o.epsilon;
    if (!o.cf_mode.empty()) p.options.counterfactual = parse_counterfactual_mode(o.cf_mode);
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return p;
}

Dataset load_group(const Options& o) {
    Dataset all;
    try {
        all = parse_responses_csv(read_file(o.data), o.data);
    } catch (const ParseError& e) {
        throw InputError(o.data + ": " + e.what());
    }
    const Group g = parse_group(o.group);
    if (!all.has_group(g)) throw InputError("group '" + o.group + "' not present in " + o.data);
    return filter_group(all, g);
}

FitConfig make_config(const Options& o) {
    FitConfig c;
    c.l1_lambda = o.l1;
    c.restarts = o.restarts;
    c.seed = o.seed;
    c.max_iterations = o.max_iterations;
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (!o.cf_mode.empty()) c.options.counterfactual = parse_counterfactual_mode(o.cf_mode);
    try {
        c.ablation = AblationSet::parse(o.ablation);
        c.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    return c;
}

std::string report_json(const FitResult& r, const FitConfig& c, const Options& o) {
    nlohmann::ordered_json j;
    j["data"] = o.data;
    j["group"] = o.group;
    j["ablation"] = c.ablation.label();
    j["l1_lambda"] = c.l1_lambda;
    j["restarts"] = c.restarts;
    j["seed"] = c.seed;
    j["max_iterations"] = c.max_iterations;
    j["convergence_tol"] = c.convergence_tol;
    j["epsilon"] = c.epsilon;
    j["temperature"] = c.temperature;
    j["counterfactual_mode"] = std::string(to_string(c.options.counterfactual));
    j["nll"] = r.nll;
    j["penalized_objective"] = r.penalized_objective;
    j["converged"] = r.converged;
    j["restart_index"] = r.restart_index;
    j["iterations"] = r.iterations;
    j["restarts_converged"] = r.restarts_converged;
    return j.dump(2) + "\n";
}

void print_params(std::ostream& out, const ParamSet& p) {
    fmt::print(out, "  prior_excess            {:.6f}\n", p.prior_excess);
    fmt::print(out, "  prior_virus             {:.6f}\n", p.prior_virus);
    fmt::print(out, "  alpha_explanandum       {:.6f}\n", p.alpha_explanandum);
    fmt::print(out, "  alpha_latents           {:.6f}\n", p.alpha_latents);
    fmt::print(out, "  alpha_social_confident  {:.6f}\n", p.alpha_social_confident);
    fmt::print(out, "  alpha_social_insecure   {:.6f}\n", p.alpha_social_insecure);
}

int cmd_predict(const Options& o, std::ostream& out) {
    Scenario scenario;
    try {
        scenario = parse_scenario_label(o.scenario);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const ParamSet p = load_params(o);
    const auto terms = utility_table(p, scenario);
    const ChoiceDistribution dist = choice_distribution(p, scenario);
    fmt::print(out, "scenario {}  (epsilon {}, counterfactual {})\n", scenario.label(), p.epsilon,
               to_string(p.options.counterfactual));
    fmt::print(out, "{:<10}{:>13}{:>13}{:>13}{:>13}{:>13}\n", "utterance", "explanandum", "latents", "social",
               "utility", "probability");
    for (Utterance u : kUtterances) {
        const auto& t = terms[u.index()];
        fmt::print(out, "{:<10}{:>13.6f}{:>13.6f}{:>13.6f}{:>13.6f}{:>13.6f}\n", u.label(), t.explanandum, t.latents,
                   t.social, combine_utility(p, scenario.temperament, t), dist[u]);
    }
    fmt::print(out, "most likely: {}\n", dist.argmax().label());
    return kSuccess;
}

int cmd_fit(const Options& o, std::ostream& out) {
    const FitConfig config = make_config(o);
    const Dataset data = load_group(o);
    const FitResult r = fit(data, config);
    write_file(o.out, params_to_string(r.params));
    write_file(o.out + ".report.json", report_json(r, config, o));
    fmt::print(out, "fit {} ({} records, ablation {})\n", o.group, data.records.size(), config.ablation.label());
    print_params(out, r.params);
    fmt::print(out, "nll {:.6f}  penalized {:.6f}  l1 {}\n", r.nll, r.penalized_objective, config.l1_lambda);
    fmt::print(out, "restart {} of {}  iterations {}  converged restarts {}\n", r.restart_index, config.restarts,
               r.iterations, r.restarts_converged);
    fmt::print(out, "wrote {} and {}.report.json\n", o.out, o.out);
    if (!r.converged) throw UnreliableResult("no restart converged");
    return kSuccess;
}

std::vector<AblationSet> parse_ablation_list(const std::string& text) {
    std::vector<AblationSet> list;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto item = text.substr(start, end - start);
        if (!item.empty()) {
            try {
                const auto a = AblationSet::parse(item);
                if (a.empty()) throw DomainError("'" + item + "' ablates nothing");
                list.push_back(a);
            } catch (const DomainError& e) {
                throw UsageError(e.what());
            }
        }
        start = end + 1;
    }
    return list;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const auto ablations = parse_ablation_list(o.ablations);
    FitConfig config = make_config(o);
    config.ablation = {};
    const Dataset data = load_group(o);
    const FitResult full = fit(data, config);
    bool all_converged = full.converged;

    std::string csv = "model,df,nll,statistic,p_value\n";
    csv += fmt::format("full,0,{:.6f},,\n", full.nll);
    fmt::print(out, "full model: nll {:.6f} ({} records, group {})\n", full.nll, data.records.size(), o.group);
    fmt::print(out, "{:<28}{:>4}{:>16}{:>14}{:>14}\n", "ablation", "df", "nll", "statistic", "p_value");
    for (const AblationSet& a : ablations) {
        FitConfig ac = config;
        ac.ablation = a;
        const FitResult r = fit(data, ac);
        all_converged = all_converged && r.converged;
        const LrtReport lrt = likelihood_ratio_test(-full.nll, -r.nll, a.pinned_count());
        fmt::print(out, "{:<28}{:>4}{:>16.6f}{:>14.6f}{:>14.6g}\n", a.label(), lrt.df, r.nll, lrt.statistic,
                   lrt.p_value);
        csv += fmt::format("{},{},{:.6f},{:.6f},{:.6g}\n", a.label(), lrt.df, r.nll, lrt.statistic, lrt.p_value);
    }
    if (!o.out.empty()) write_file(o.out, csv);
    if (!all_converged) throw UnreliableResult("at least one fit did not converge");
    return kSuccess;
}

int cmd_bootstrap(const Options& o, std::ostream& out) {
    BootstrapStatistic statistic;
    try {
        statistic = parse_bootstrap_statistic(o.statistic);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const FitConfig config = make_config(o);
    const Dataset data = load_group(o);
    const BootstrapReport r = bootstrap_ci(data, config, statistic, o.reps, o.confidence, o.seed);

    std::string csv = "replicate,value\n";
    std::size_t next_value = 0;
    std::size_t next_failure = 0;
    for (int i = 0; i < r.replicates; ++i) {
        if (next_failure < r.failed_replicates.size() && r.failed_replicates[next_failure] == i) {
            csv += fmt::format("{},NA\n", i);
            ++next_failure;
        } else {
            csv += fmt::format("{},{:.10g}\n", i, r.values[next_value++]);
        }
    }
    write_file(o.out, csv);

    fmt::print(out, "statistic {} for group {} ({} participants)\n", to_string(statistic), o.group,
               data.participants().size());
    fmt::print(out, "point estimate {:.6f}\n", r.point_estimate);
    fmt::print(out, "{:g}% percentile interval [{:.6f}, {:.6f}]\n", 100.0 * r.confidence_level, r.lower, r.upper);
    fmt::print(out, "replicates {} (failed {})  excludes zero: {}\n", r.replicates, r.failures,
               r.excludes_zero() ? "yes" : "no");
    fmt::print(out, "wrote {}\n", o.out);
    return kSuccess;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const ParamSet p = load_params(o);
    const Dataset data = simulate_dataset(p, o.n, parse_group(o.group), o.seed);
    std::ostringstream csv;
    write_responses_csv(csv, data);
    write_file(o.out, csv.str());
    fmt::print(out, "simulated {} participants ({} records, group {}) -> {}\n", o.n, data.records.size(), o.group,
               o.out);
    return kSuccess;
}

int cmd_recover(const Options& o, std::ostream& out) {
    const ParamSet generating = load_params(o);
    FitConfig config = make_config(o);
    config.epsilon = generating.epsilon;
    config.temperature = generating.temperature;
    config.options = generating.options;
    const Dataset data = simulate_dataset(generating, o.n, parse_group(o.group), o.seed);
    const FitResult r = fit(data, config);
    const double r2 = choice_r_squared(generating, r.params);
    out << "generating parameters:\n" << params_to_string(generating);
    out << "recovered parameters:\n" << params_to_string(r.params);
    fmt::print(out, "nll {:.6f}  converged {}  ({} participants, {} records)\n", r.nll, r.converged ? "yes" : "no",
               o.n, data.records.size());
    fmt::print(out, "r2 between generating and recovered choice probabilities (24 cells): {:.6f}\n", r2);
    if (!o.out.empty()) write_file(o.out, params_to_string(r.params));
    if (!r.converged) throw UnreliableResult("no restart converged");
    return kSuccess;
}

int cmd_export_fig(const Options& o, std::ostream& out) {
    const ParamSet p = load_params(o);
    const Dataset data = load_group(o);
    std::ostringstream csv;
    const auto rows = figure_rows(p, data, parse_group(o.group));
    write_figure_csv(csv, rows);
    write_file(o.out, csv.str());
    fmt::print(out, "wrote {} rows to {}\n", rows.size(), o.out);
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Emotion-aware explanation model: predict, fit and compare explainer choices."};
    app.name(args.empty() ? "tactful" : args.front());
    app.require_subcommand(1);
    Options o;

    const auto groups = CLI::IsMember({"tactful", "candid"});
    const auto cf_modes = CLI::IsMember({"twin", "interventional"});
    auto model_flags = [&](CLI::App* sub) {
        sub->add_option("--epsilon", o.epsilon, "Pr(sick) with neither cause, in (0, 0.125)");
        sub->add_option("--cf-mode", o.cf_mode, "Counterfactual semantics")->check(cf_modes);
    };
    auto fit_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Random seed")->required();
        sub->add_option("--restarts", o.restarts, "Random restarts")->check(CLI::Range(1, 100000));
        sub->add_option("--l1", o.l1, "L1 penalty on the utility weights")->check(CLI::NonNegativeNumber);
        sub->add_option("--max-iter", o.max_iterations, "Iterations per restart")->check(CLI::PositiveNumber);
        model_flags(sub);
    };
    auto data_flags = [&](CLI::App* sub) {
        sub->add_option("--data", o.data, "Response CSV")->required();
        sub->add_option("--group", o.group, "Participant group")->required()->check(groups);
    };

    auto* predict = app.add_subcommand("predict", "Utility terms and choice probabilities for one scenario");
    predict->add_option("scenario", o.scenario, "Scenario label, e.g. insecure:11")->required();
    predict->add_option("--params", o.params, "Parameter file")->required();
    model_flags(predict);

    auto* fit_cmd = app.add_subcommand("fit", "Fit the six free parameters to one group");
    data_flags(fit_cmd);
    fit_cmd->add_option("--out", o.out, "Output parameter file")->required();
    fit_cmd->add_option("--ablate", o.ablation, "Pinned weights, e.g. regret+latents");
    fit_flags(fit_cmd);

    auto* compare = app.add_subcommand("compare", "Likelihood-ratio tests of ablations against the full model");
    data_flags(compare);
    compare->add_option("--ablations", o.ablations, "Comma-separated ablations; empty for none");
    compare->add_option("--out", o.out, "Optional CSV table");
    fit_flags(compare);

    auto* boot = app.add_subcommand("bootstrap", "Percentile bootstrap over participants");
    data_flags(boot);
    boot->add_option("--statistic", o.statistic, "r2 or a parameter name");
    boot->add_option("--reps", o.reps, "Replicates (>= 10)")->check(CLI::Range(10, 1000000));
    boot->add_option("--confidence", o.confidence, "Interval coverage")->check(CLI::Range(0.5, 0.999999));
    boot->add_option("--out", o.out, "Per-replicate values CSV")->required();
    fit_flags(boot);

    auto* simulate = app.add_subcommand("simulate", "Sample a synthetic response CSV");
    simulate->add_option("--params", o.params, "Parameter file")->required();
    simulate->add_option("--n", o.n, "Participants")->required()->check(CLI::Range(1, 10000000));
    simulate->add_option("--seed", o.seed, "Random seed")->required();
    simulate->add_option("--group", o.group, "Group label for the records")->check(groups);
    simulate->add_option("--out", o.out, "Output CSV")->required();
    model_flags(simulate);

    auto* recover = app.add_subcommand("recover", "Simulate, refit and report parameter recovery");
    recover->add_option("--params", o.params, "Generating parameter file")->required();
    recover->add_option("--n", o.n, "Participants")->required()->check(CLI::Range(1, 10000000));
    recover->add_option("--group", o.group, "Group label for the records")->check(groups);
    recover->add_option("--out", o.out, "Optional recovered parameter file");
    fit_flags(recover);

    auto* export_fig = app.add_subcommand("export-fig", "Empirical vs model proportions per cell");
    export_fig->add_option("--params", o.params, "Fitted parameter file")->required();
    data_flags(export_fig);
    export_fig->add_option("--out", o.out, "Output CSV")->required();
    model_flags(export_fig);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kSuccess;
        }
        err << "error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        if (chosen == predict) return cmd_predict(o, out);
        if (chosen == fit_cmd) return cmd_fit(o, out);
        if (chosen == compare) return cmd_compare(o, out);
        if (chosen == boot) return cmd_bootstrap(o, out);
        if (chosen == simulate) return cmd_simulate(o, out);
        if (chosen == recover) return cmd_recover(o, out);
        if (chosen == export_fig) return cmd_export_fig(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << chosen->help();
        return kUsage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    } catch (const UnreliableResult& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    } catch (const InvariantError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}

}  // namespace tactful::cli
