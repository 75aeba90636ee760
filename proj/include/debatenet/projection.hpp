#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debatenet/bicm.hpp"
#include "debatenet/graph.hpp"

namespace debatenet {

struct CoOccurrence {
    NodeIndex first;   // first < second
    NodeIndex second;
    std::int64_t count;
};

// Number of common bottom neighbors for every top pair that shares at least one.
class CoOccurrenceTable {
public:
    CoOccurrenceTable() = default;
    explicit CoOccurrenceTable(std::vector<CoOccurrence> entries);

    std::span<const CoOccurrence> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    /// Zero for pairs absent from the table; order of the indices does not matter.
    std::int64_t count(NodeIndex a, NodeIndex b) const;

private:
    std::vector<CoOccurrence> entries_;  // sorted by (first, second)
};

CoOccurrenceTable co_occurrences(const BipartiteGraph& graph);

/// P(X >= observed) for X a sum of independent Bernoulli(probs[k]). Exact dynamic
/// programming over counts truncated at `observed`.
double poisson_binomial_upper_tail(std::span<const double> probs, std::int64_t observed);

/// P(X >= observed) for X ~ Poisson(rate).
double poisson_upper_tail(double rate, std::int64_t observed);

inline constexpr std::size_t kDefaultExactThreshold = 20000;

/// Upper tail of the co-occurrence count of tops i and j under the model. Exact when the
/// bottom layer has at most `exact_threshold` nodes, Poisson approximation otherwise.
/// Throws InputError when observed is negative or exceeds the bottom layer size.
double pair_pvalue(const BicmModel& model, NodeIndex i, NodeIndex j, std::int64_t observed,
                   std::size_t exact_threshold = kDefaultExactThreshold);

enum class Correction { fdr, bonferroni, none };

std::string to_string(Correction c);
Correction parse_correction(const std::string& name);

/// Benjamini-Hochberg step-up: the largest p_(k) with p_(k) <= k * alpha / M, or nothing
/// when no hypothesis is rejected.
std::optional<double> benjamini_hochberg_threshold(std::span<const double> pvalues, double alpha);

struct ValidationOptions {
    double alpha = 0.01;
    Correction correction = Correction::fdr;
    std::size_t exact_threshold = kDefaultExactThreshold;
    unsigned threads = 1;
};

struct ValidatedEdge {
    NodeIndex first;
    NodeIndex second;
    std::int64_t count;
    double pvalue;
};

struct ValidatedProjection {
    std::vector<std::string> nodes;  // top-layer ids
    std::vector<ValidatedEdge> edges;
    double alpha = 0.01;
    Correction correction = Correction::fdr;
    std::size_t hypotheses = 0;          // pairs with at least one common neighbor
    std::optional<double> threshold;     // realized p-value cut; empty when nothing passed
    bool approximate = false;            // Poisson tails were used
    std::size_t exact_threshold = kDefaultExactThreshold;
};

/// Tests every top pair with a positive co-occurrence and keeps the significant ones.
/// Output is independent of the thread count.
ValidatedProjection validate_projection(const BipartiteGraph& graph, const BicmModel& model,
                                        const ValidationOptions& options = {});

}  // namespace debatenet
