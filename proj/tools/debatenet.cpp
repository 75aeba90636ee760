// Command line driver: one subcommand per pipeline stage, plus `all`.

#include <CLI11.hpp>
#include <iostream>

#include "debatenet/stages.hpp"

namespace cli = debatenet::cli;

namespace {

void add_options(CLI::App& app, cli::StageConfig& c, std::string& tweets, std::string& edges, std::string& states,
                 std::string& labels, std::string& bot_scores, std::string& url_map) {
    app.add_option("--out,-o", c.out, "Output directory shared by all stages")->capture_default_str();
    app.add_option("--tweets", tweets, "Tweets as JSON lines (ingest)");
    app.add_option("--edges", edges,
                   "Extra interactions CSV: retweeter_id,author_id,author_verified,count[,retweeter_verified] (ingest)");
    app.add_option("--states", states, "States CSV: name,kind with kind swing or safe (ingest)");
    app.add_option("--url-map", url_map, "Short URL resolutions CSV: short_url,resolved_url (ingest)");
    app.add_option("--lang", c.lang, "Language code to keep (ingest)")->capture_default_str();
    app.add_flag("--state-first", c.state_first, "Match states before applying the language filter (ingest)");
    app.add_option("--tol", c.tol, "Maximum relative degree residual of the fit (fit)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--max-iter", c.max_iter, "Solver iteration budget (fit)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--alpha", c.alpha, "Significance level for projection links (project)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--correction", c.correction, "Multiple testing correction (project)")
        ->capture_default_str()
        ->check(CLI::IsMember({"fdr", "bonferroni", "none"}));
    app.add_option("--exact-threshold", c.exact_threshold,
                   "Largest unverified layer for exact p-values; above it a Poisson approximation is used (project)")
        ->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads for p-values; output does not depend on it (project)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--resolution", c.resolution, "Louvain resolution (communities)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", c.seed, "Seed for Louvain visit order and propagation tie breaks")->capture_default_str();
    app.add_option("--min-component-size", c.min_component_size,
                   "Drop projection components smaller than this before Louvain (communities)")
        ->capture_default_str();
    app.add_option("--max-sweeps", c.max_sweeps, "Label propagation sweep limit (propagate)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--labels", labels, "Domain labels CSV: domain,tag[,orientation] (classify)");
    app.add_option("--bot-scores", bot_scores, "Bot scores CSV: user_id,score (classify)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-based filtering and disinformation reporting for retweet debates"};
    app.set_version_flag("--version", DEBATENET_VERSION);
    app.require_subcommand(1);

    cli::StageConfig config;
    std::string tweets, edges, states, labels, bot_scores, url_map;

    const std::pair<const char*, const char*> commands[] = {
        {"ingest", "Filter tweets by language and state, resolve URLs, collect retweet interactions"},
        {"fit", "Fit the bipartite configuration model to the verified/unverified network"},
        {"project", "Validate co-retweet links between verified users"},
        {"communities", "Run Louvain on the validated projection"},
        {"propagate", "Propagate community labels over the retweet network"},
        {"classify", "Tag URLs by domain reliability and users by bot-score decile"},
        {"report", "Aggregate the per-state, community, reliability, bot and virality tables"},
        {"stats", "Chi-square, Kolmogorov-Smirnov and Mann-Whitney tests on the report inputs"},
        {"all", "Run every stage in order"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_options(*sub, config, tweets, edges, states, labels, bot_scores, url_map);
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    auto set = [](std::optional<std::filesystem::path>& target, const std::string& value) {
        if (!value.empty()) target = value;
    };
    set(config.tweets, tweets);
    set(config.edges, edges);
    set(config.states, states);
    set(config.labels, labels);
    set(config.bot_scores, bot_scores);
    set(config.url_map, url_map);

    try {
        std::vector<cli::StageOutcome> outcomes;
        for (auto* sub : subs) {
            if (!sub->parsed()) continue;
            if (sub->get_name() == "all") {
                outcomes = cli::run_all(config);
            } else {
                outcomes.push_back(cli::run_stage(cli::parse_stage(sub->get_name()), config));
            }
        }
        for (const auto& o : outcomes) {
            std::cout << cli::to_string(o.stage) << ":";
            for (const auto& a : o.artifacts) std::cout << ' ' << a;
            std::cout << '\n';
            for (const auto& n : o.notices) std::cerr << "note: " << n << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code(e);
    }
    return 0;
}
