#include "debatenet/stages.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <json.hpp>
#include <map>

#include "debatenet/bicm.hpp"
#include "debatenet/community.hpp"
#include "debatenet/domain.hpp"
#include "debatenet/error.hpp"
#include "debatenet/io.hpp"
#include "debatenet/pipeline.hpp"
#include "debatenet/projection.hpp"

namespace debatenet::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::ingest: return "ingest";
        case Stage::fit: return "fit";
        case Stage::project: return "project";
        case Stage::communities: return "communities";
        case Stage::propagate: return "propagate";
        case Stage::classify: return "classify";
        case Stage::report: return "report";
        case Stage::stats: return "stats";
    }
    return "?";
}

Stage parse_stage(const std::string& name) {
    for (Stage s : kAllStages) {
        if (to_string(s) == name) return s;
    }
    throw InputError("unknown stage '" + name + "'");
}

int exit_code(const std::exception& error) {
    if (dynamic_cast<const ConvergenceError*>(&error)) return 3;
    if (dynamic_cast<const InputError*>(&error) || dynamic_cast<const StageError*>(&error)) return 2;
    return 1;
}

namespace {

constexpr const char* kManifest = "manifest.json";

// Exclusive advisory lock on the output directory, released when the process exits.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) {
        const auto path = dir / ".debatenet.lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw std::runtime_error("cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw std::runtime_error("another debatenet process is writing to " + dir.string());
        }
    }
    ~DirectoryLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    int fd_ = -1;
};

struct Context {
    const StageConfig& config;
    Stage stage;
    json inputs = json::object();
    StageOutcome outcome;

    fs::path path(const std::string& name) const { return config.out / name; }

    // Upstream artifact produced by `producer`.
    fs::path upstream(const std::string& name, Stage producer) {
        const auto p = path(name);
        if (!fs::exists(p)) {
            throw StageError("stage '" + to_string(stage) + "' needs " + p.string() + "; run '" +
                             to_string(producer) + "' first");
        }
        inputs[name] = io::sha256_file(p);
        return p;
    }

    // User-supplied input file.
    fs::path external(const std::optional<fs::path>& given, const std::string& flag) {
        if (!given) throw InputError("stage '" + to_string(stage) + "' requires " + flag);
        if (!fs::exists(*given)) throw InputError(flag + ": no such file " + given->string());
        inputs[flag] = {{"path", given->string()}, {"sha256", io::sha256_file(*given)}};
        return *given;
    }

    void write(const std::string& name, const std::string& content) {
        io::write_file_atomic(path(name), content);
        outcome.artifacts.push_back(name);
    }
};

json config_json(const StageConfig& c) {
    auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
    return {{"out", c.out.string()},
            {"tweets", opt(c.tweets)},
            {"edges", opt(c.edges)},
            {"states", opt(c.states)},
            {"labels", opt(c.labels)},
            {"bot_scores", opt(c.bot_scores)},
            {"url_map", opt(c.url_map)},
            {"lang", c.lang},
            {"state_first", c.state_first},
            {"tol", c.tol},
            {"max_iter", c.max_iter},
            {"alpha", c.alpha},
            {"correction", c.correction},
            {"exact_threshold", c.exact_threshold},
            {"threads", c.threads},
            {"resolution", c.resolution},
            {"seed", c.seed},
            {"min_component_size", c.min_component_size},
            {"max_sweeps", c.max_sweeps}};
}

io::IngestSummary load_ingest(Context& ctx) {
    return io::parse_ingest_json(io::read_file(ctx.upstream("ingest.json", Stage::ingest)));
}

std::vector<ProcessedTweet> load_tweets(Context& ctx, const std::vector<StateSpec>& states) {
    const auto p = ctx.upstream("tweets.jsonl", Stage::ingest);
    return io::parse_processed_tweets(io::read_file(p), states, p.string());
}

BipartiteGraph load_bipartite(Context& ctx) {
    const auto records = io::read_interactions(ctx.upstream("interactions.csv", Stage::ingest));
    const auto split = split_interactions(records);
    return build_bipartite(split.bipartite);
}

void run_ingest(Context& ctx) {
    const auto& c = ctx.config;
    const auto tweets_path = ctx.external(c.tweets, "--tweets");
    const auto states = io::read_states(ctx.external(c.states, "--states"));
    std::map<std::string, std::string> url_map;
    if (c.url_map) url_map = io::read_url_map(ctx.external(c.url_map, "--url-map"));
    auto records = io::parse_tweets_jsonl(io::read_file(tweets_path), tweets_path.string());

    const StateMatcher matcher(states);
    IngestOptions options;
    options.lang = c.lang;
    options.language_first = !c.state_first;
    auto result = ingest_tweets(std::move(records), matcher, url_map, options);
    if (c.edges) {
        auto extra = io::read_interactions(ctx.external(c.edges, "--edges"));
        result.interactions.insert(result.interactions.end(), extra.begin(), extra.end());
    }
    const auto net = build_retweet_network(split_interactions(result.interactions).retweets);
    for (const auto& d : net.diagnostics()) ctx.outcome.notices.push_back(d);
    if (net.dropped_self_loops() > 0) {
        ctx.outcome.notices.push_back("dropped " + std::to_string(net.dropped_self_loops()) + " self-retweet rows");
    }

    ctx.write("tweets.jsonl", io::processed_tweets_jsonl(result.tweets, states));
    ctx.write("interactions.csv", io::interactions_csv(result.interactions));
    ctx.write("ingest.json", io::ingest_json(result.counts, result.language_first, c.lang, states,
                                             result.interactions.size()));
}

void run_fit(Context& ctx) {
    const auto graph = load_bipartite(ctx);
    BicmOptions options;
    options.tol = ctx.config.tol;
    options.max_iter = ctx.config.max_iter;
    const auto model = fit_bicm(degree_sequence(graph), options);
    ctx.write("model.json", io::model_json(model, graph.top_ids(), graph.bottom_ids()));
}

void run_project(Context& ctx) {
    const auto graph = load_bipartite(ctx);
    const auto model = io::parse_model_json(io::read_file(ctx.upstream("model.json", Stage::fit)));
    if (model.top_ids != graph.top_ids() || model.bottom_ids != graph.bottom_ids()) {
        throw StageError("model.json does not match interactions.csv; rerun 'fit'");
    }
    ValidationOptions options;
    options.alpha = ctx.config.alpha;
    options.correction = parse_correction(ctx.config.correction);
    options.exact_threshold = ctx.config.exact_threshold;
    options.threads = ctx.config.threads;
    const auto projection = validate_projection(graph, model.model, options);
    if (projection.approximate) ctx.outcome.notices.push_back("p-values use the Poisson approximation");
    ctx.write("projection.csv", io::projection_csv(projection));
    ctx.write("projection.json", io::projection_json(projection));
}

void run_communities(Context& ctx) {
    const auto projection =
        io::parse_projection_json(io::read_file(ctx.upstream("projection.json", Stage::project)));
    const auto graph = UndirectedGraph::from_projection(projection);
    if (graph.node_count() == 0) throw InputError("the validated projection has no nodes");
    LouvainOptions options;
    options.resolution = ctx.config.resolution;
    options.seed = ctx.config.seed;
    const auto detection = detect_communities(graph, ctx.config.min_component_size, options);
    if (detection.partition.community_count() == 0) {
        ctx.outcome.notices.push_back("no component reaches the minimum size; every node is unassigned");
    }
    ctx.write("communities.csv", io::partition_csv(detection.partition));
    ctx.write("communities.json", io::communities_json(detection));
}

void run_propagate(Context& ctx) {
    const auto communities = io::parse_partition_csv(io::read_csv(ctx.upstream("communities.csv", Stage::communities)));
    const auto records = io::read_interactions(ctx.upstream("interactions.csv", Stage::ingest));
    const auto net = build_retweet_network(split_interactions(records).retweets);
    const auto seeds = communities.as_map();
    PropagationOptions options;
    options.seed = ctx.config.seed;
    options.max_sweeps = ctx.config.max_sweeps;
    const auto partition = label_propagation(net, seeds, options);
    if (!partition.converged) {
        ctx.outcome.notices.push_back("label propagation stopped at the sweep limit");
    }
    ctx.write("partition.csv", io::partition_csv(partition));
    ctx.write("partition.json", io::partition_json(partition, seeds.size()));
}

void run_classify(Context& ctx) {
    const auto ingest = load_ingest(ctx);
    const auto tweets = load_tweets(ctx, ingest.states);
    const auto partition = io::parse_partition_csv(io::read_csv(ctx.upstream("partition.csv", Stage::propagate)));
    DomainTable labels;
    if (ctx.config.labels) {
        labels = DomainTable(io::read_domain_labels(ctx.external(ctx.config.labels, "--labels")));
    } else {
        ctx.outcome.notices.push_back("no --labels given; every domain is UNC");
    }
    std::vector<BotScoreRecord> scores;
    if (ctx.config.bot_scores) {
        scores = io::read_bot_scores(ctx.external(ctx.config.bot_scores, "--bot-scores"));
    } else {
        ctx.outcome.notices.push_back("no --bot-scores given; bot tables will be omitted");
    }
    const auto urls = classify_urls(tweets, labels);
    const auto users = classify_users(tweets, partition.as_map(), scores);
    for (const auto& n : users.notices) ctx.outcome.notices.push_back(n);
    ctx.write("urls.csv", io::urls_csv(urls));
    ctx.write("users.csv", io::users_csv(users));
    ctx.write("classify.json", io::classify_json(urls, users, labels.size(), labels.has_orientation()));
}

ReportInputs load_report_inputs(Context& ctx) {
    const auto ingest = load_ingest(ctx);
    ReportInputs in;
    in.states = ingest.states;
    in.ingest = ingest.counts;
    in.tweets = load_tweets(ctx, ingest.states);
    in.communities =
        io::parse_partition_csv(io::read_csv(ctx.upstream("partition.csv", Stage::propagate))).as_map();
    in.urls = io::parse_urls_csv(io::read_csv(ctx.upstream("urls.csv", Stage::classify)));
    in.users = io::parse_users_csv(io::read_csv(ctx.upstream("users.csv", Stage::classify)));
    const auto summary = json::parse(io::read_file(ctx.upstream("classify.json", Stage::classify)));
    in.has_orientation = summary.at("has_orientation").get<bool>();
    in.has_bots = !summary.at("deciles").is_null();
    return in;
}

void run_report(Context& ctx) {
    const auto report = aggregate_reports(load_report_inputs(ctx));
    for (const auto& n : report.notices) ctx.outcome.notices.push_back(n);
    ctx.write("report.json", io::report_json(report));
    for (const auto& [name, content] : io::report_csv_tables(report)) ctx.write(name, content);
}

void run_stats(Context& ctx) {
    const auto tests = run_report_tests(load_report_inputs(ctx));
    for (const auto& n : tests.notices) ctx.outcome.notices.push_back(n);
    ctx.write("tests.json", io::report_tests_json(tests));
}

void record_manifest(const Context& ctx) {
    const auto path = ctx.path(kManifest);
    json manifest;
    if (fs::exists(path)) {
        try {
            manifest = json::parse(io::read_file(path));
        } catch (const json::exception&) {
            manifest = json::object();
        }
    }
    manifest["tool"] = "debatenet";
    manifest["version"] = DEBATENET_VERSION;
    if (!manifest.contains("stages")) manifest["stages"] = json::object();
    json outputs = json::object();
    for (const auto& name : ctx.outcome.artifacts) outputs[name] = io::sha256_file(ctx.path(name));
    manifest["stages"][to_string(ctx.stage)] = {{"config", config_json(ctx.config)},
                                                {"inputs", ctx.inputs},
                                                {"outputs", outputs},
                                                {"seconds", ctx.outcome.seconds},
                                                {"notices", ctx.outcome.notices}};
    json seeds = json::object();
    for (const char* s : {"communities", "propagate"}) {
        if (manifest["stages"].contains(s)) seeds[s] = manifest["stages"][s]["config"]["seed"];
    }
    manifest["seeds"] = seeds;
    io::write_file_atomic(path, manifest.dump(2) + "\n");
}

}  // namespace

StageOutcome run_stage(Stage stage, const StageConfig& config) {
    fs::create_directories(config.out);
    DirectoryLock lock(config.out);
    Context ctx{config, stage, json::object(), StageOutcome{stage, {}, {}, 0.0}};
    const auto start = std::chrono::steady_clock::now();
    switch (stage) {
        case Stage::ingest: run_ingest(ctx); break;
        case Stage::fit: run_fit(ctx); break;
        case Stage::project: run_project(ctx); break;
        case Stage::communities: run_communities(ctx); break;
        case Stage::propagate: run_propagate(ctx); break;
        case Stage::classify: run_classify(ctx); break;
        case Stage::report: run_report(ctx); break;
        case Stage::stats: run_stats(ctx); break;
    }
    ctx.outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record_manifest(ctx);
    return ctx.outcome;
}

std::vector<StageOutcome> run_all(const StageConfig& config) {
    std::vector<StageOutcome> out;
    for (Stage s : kAllStages) out.push_back(run_stage(s, config));
    return out;
}

}  // namespace debatenet::cli
