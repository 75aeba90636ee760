#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace debatenet::cli {

struct StageConfig {
    std::filesystem::path out = "out";

    // inputs
    std::optional<std::filesystem::path> tweets;
    std::optional<std::filesystem::path> edges;
    std::optional<std::filesystem::path> states;
    std::optional<std::filesystem::path> labels;
    std::optional<std::filesystem::path> bot_scores;
    std::optional<std::filesystem::path> url_map;

    // ingest
    std::string lang = "en";
    bool state_first = false;
    // fit
    double tol = 1e-8;
    int max_iter = 10000;
    // project
    double alpha = 0.01;
    std::string correction = "fdr";
    std::size_t exact_threshold = 20000;
    unsigned threads = 1;
    // communities / propagate
    double resolution = 1.0;
    std::uint64_t seed = 0;
    std::size_t min_component_size = 2;
    int max_sweeps = 100;
};

enum class Stage { ingest, fit, project, communities, propagate, classify, report, stats };

inline constexpr Stage kAllStages[] = {Stage::ingest,    Stage::fit,      Stage::project, Stage::communities,
                                       Stage::propagate, Stage::classify, Stage::report,  Stage::stats};

std::string to_string(Stage stage);
Stage parse_stage(const std::string& name);

struct StageOutcome {
    Stage stage;
    std::vector<std::string> artifacts;  // file names inside the output directory
    std::vector<std::string> notices;
    double seconds = 0.0;
};

/// Runs one stage against the output directory, then records it in manifest.json.
/// Throws StageError when an upstream artifact is missing, InputError on bad input and
/// ConvergenceError when the model fit does not converge.
StageOutcome run_stage(Stage stage, const StageConfig& config);

/// Every stage in order.
std::vector<StageOutcome> run_all(const StageConfig& config);

/// 2 for input problems (including missing upstream artifacts), 3 for non-convergence,
/// 1 otherwise.
int exit_code(const std::exception& error);

}  // namespace debatenet::cli
