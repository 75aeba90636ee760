#pragma once

// Helpers shared by the unit tests and the acceptance runner. Oracles here are written
// independently of the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "debatenet/bicm.hpp"
#include "debatenet/graph.hpp"
#include "debatenet/projection.hpp"
#include "debatenet/rng.hpp"

namespace support {

inline std::string pad(std::size_t i, const char* prefix) {
    std::string s = std::to_string(i);
    while (s.size() < 5) s.insert(s.begin(), '0');
    return prefix + s;
}

/// Erdos-Renyi style bipartite graph with every node present, even when isolated.
inline debatenet::BipartiteGraph random_bipartite(std::size_t tops, std::size_t bottoms, double density,
                                                  std::uint64_t seed) {
    debatenet::Rng rng(seed);
    std::vector<std::string> t, b;
    for (std::size_t i = 0; i < tops; ++i) t.push_back(pad(i, "t"));
    for (std::size_t a = 0; a < bottoms; ++a) b.push_back(pad(a, "b"));
    std::vector<debatenet::Edge> edges;
    for (std::size_t i = 0; i < tops; ++i) {
        for (std::size_t a = 0; a < bottoms; ++a) {
            if (rng.uniform() < density) edges.push_back({static_cast<debatenet::NodeIndex>(i),
                                                          static_cast<debatenet::NodeIndex>(a)});
        }
    }
    return debatenet::BipartiteGraph(std::move(t), std::move(b), std::move(edges));
}

/// P(sum >= observed) by walking all 2^n outcomes.
inline double enumerate_tail(const std::vector<double>& p, std::int64_t observed) {
    const std::size_t n = p.size();
    double tail = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double w = 1.0;
        std::int64_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1u) {
                w *= p[i];
                ++k;
            } else {
                w *= 1.0 - p[i];
            }
        }
        if (k >= observed) tail += w;
    }
    return tail;
}

/// Benjamini-Hochberg kept set written from the definition: sort, find the largest
/// rank k with p_(k) <= k alpha / M, keep everything at or below p_(k).
inline std::vector<bool> naive_bh(const std::vector<double>& p, double alpha) {
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(p.size());
    double cut = -1.0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        if (sorted[k - 1] <= static_cast<double>(k) * alpha / m) cut = sorted[k - 1];
    }
    std::vector<bool> keep(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) keep[i] = p[i] <= cut;
    return keep;
}

/// Exact p-value of one top pair under the model, by direct DP from the definition.
inline double pair_tail_oracle(const debatenet::BicmModel& m, debatenet::NodeIndex i, debatenet::NodeIndex j,
                               std::int64_t observed) {
    std::vector<double> dist{1.0};
    for (debatenet::NodeIndex a = 0; a < m.bottom_count(); ++a) {
        const double q = m.probability(i, a) * m.probability(j, a);
        std::vector<double> next(dist.size() + 1, 0.0);
        for (std::size_t k = 0; k < dist.size(); ++k) {
            next[k] += dist[k] * (1.0 - q);
            next[k + 1] += dist[k] * q;
        }
        dist.swap(next);
    }
    double tail = 0.0;
    for (std::size_t k = static_cast<std::size_t>(std::max<std::int64_t>(observed, 0)); k < dist.size(); ++k) {
        tail += dist[k];
    }
    return std::min(tail, 1.0);
}

/// Two planted blocks: tops [0, 10) and bottoms [0, 200) form block A, the rest block B.
/// Edges appear with probability `within` inside a block and `across` between blocks.
inline debatenet::BipartiteGraph planted_two_block(std::uint64_t seed, double within = 0.6, double across = 0.02) {
    constexpr std::size_t tops = 20, bottoms = 400;
    debatenet::Rng rng(seed);
    std::vector<std::string> t, b;
    for (std::size_t i = 0; i < tops; ++i) t.push_back(pad(i, "t"));
    for (std::size_t a = 0; a < bottoms; ++a) b.push_back(pad(a, "b"));
    std::vector<debatenet::Edge> edges;
    for (std::size_t i = 0; i < tops; ++i) {
        for (std::size_t a = 0; a < bottoms; ++a) {
            const bool same = (i < tops / 2) == (a < bottoms / 2);
            if (rng.uniform() < (same ? within : across)) {
                edges.push_back({static_cast<debatenet::NodeIndex>(i), static_cast<debatenet::NodeIndex>(a)});
            }
        }
    }
    return debatenet::BipartiteGraph(std::move(t), std::move(b), std::move(edges));
}

inline bool same_block(debatenet::NodeIndex i, debatenet::NodeIndex j) { return (i < 10) == (j < 10); }

struct PlantedOutcome {
    std::size_t hypotheses = 0;
    std::size_t validated = 0;
    std::size_t within_validated = 0;
    std::size_t within_pairs = 0;  // same-block pairs, 2 * C(10, 2)
    std::size_t cross_validated = 0;
    std::size_t oracle_validated = 0;
    std::size_t oracle_agreement = 0;  // pairs on which library and oracle agree
    double precision() const { return validated ? double(within_validated) / double(validated) : 1.0; }
    double recall() const { return double(within_validated) / double(within_pairs); }
};

/// Fits, validates with FDR and compares against per-pair DP tails plus a naive BH.
inline PlantedOutcome evaluate_planted(std::uint64_t seed, double alpha) {
    using namespace debatenet;
    const auto g = planted_two_block(seed);
    const auto m = fit_bicm(degree_sequence(g));
    ValidationOptions o;
    o.alpha = alpha;
    const auto v = validate_projection(g, m, o);

    const auto table = co_occurrences(g);
    std::vector<double> p;
    std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
    for (const auto& e : table.entries()) {
        p.push_back(pair_tail_oracle(m, e.first, e.second, e.count));
        pairs.emplace_back(e.first, e.second);
    }
    const auto keep = naive_bh(p, alpha);

    PlantedOutcome out;
    out.hypotheses = v.hypotheses;
    out.validated = v.edges.size();
    out.within_pairs = 2 * 45;
    std::vector<std::pair<NodeIndex, NodeIndex>> got;
    for (const auto& e : v.edges) {
        got.emplace_back(e.first, e.second);
        if (same_block(e.first, e.second)) {
            ++out.within_validated;
        } else {
            ++out.cross_validated;
        }
    }
    std::sort(got.begin(), got.end());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        out.oracle_validated += keep[k];
        const bool lib = std::binary_search(got.begin(), got.end(), pairs[k]);
        out.oracle_agreement += lib == keep[k];
    }
    return out;
}

// Zachary karate club, 34 nodes, 78 edges, 1-based as usually printed.
inline const std::vector<std::pair<int, int>>& karate_edges() {
    static const std::vector<std::pair<int, int>> e = {
        {1, 2},   {1, 3},   {1, 4},   {1, 5},   {1, 6},   {1, 7},   {1, 8},   {1, 9},   {1, 11},  {1, 12},
        {1, 13},  {1, 14},  {1, 18},  {1, 20},  {1, 22},  {1, 32},  {2, 3},   {2, 4},   {2, 8},   {2, 14},
        {2, 18},  {2, 20},  {2, 22},  {2, 31},  {3, 4},   {3, 8},   {3, 9},   {3, 10},  {3, 14},  {3, 28},
        {3, 29},  {3, 33},  {4, 8},   {4, 13},  {4, 14},  {5, 7},   {5, 11},  {6, 7},   {6, 11},  {6, 17},
        {7, 17},  {9, 31},  {9, 33},  {9, 34},  {10, 34}, {14, 34}, {15, 33}, {15, 34}, {16, 33}, {16, 34},
        {19, 33}, {19, 34}, {20, 34}, {21, 33}, {21, 34}, {23, 33}, {23, 34}, {24, 26}, {24, 28}, {24, 30},
        {24, 33}, {24, 34}, {25, 26}, {25, 28}, {25, 32}, {26, 32}, {27, 30}, {27, 34}, {28, 34}, {29, 32},
        {29, 34}, {30, 33}, {30, 34}, {31, 33}, {31, 34}, {32, 33}, {32, 34}, {33, 34}};
    return e;
}

/// Modularity straight from the definition with an adjacency matrix.
inline double modularity_oracle(std::size_t n, const std::vector<std::pair<int, int>>& edges,
                                const std::vector<int>& labels) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    std::vector<double> k(n, 0.0);
    double two_m = 0.0;
    for (const auto& [u, v] : edges) {
        a[u][v] += 1.0;
        a[v][u] += 1.0;
        k[u] += 1.0;
        k[v] += 1.0;
        two_m += 2.0;
    }
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (labels[i] >= 0 && labels[i] == labels[j]) q += a[i][j] - k[i] * k[j] / two_m;
        }
    }
    return q / two_m;
}

/// Best-of-restarts greedy search with no aggregation: each node jumps to the
/// neighboring community with the largest modularity gain until nothing moves, then
/// the best-gaining pair of communities is merged, and the two steps repeat.
inline double greedy_modularity_oracle(std::size_t n, const std::vector<std::pair<int, int>>& edges, int restarts,
                                       std::uint64_t seed) {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    debatenet::Rng rng(seed);
    double best = -1.0;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> label(n);
        for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<int>(i);
        bool moved = true;
        while (moved) {
            moved = false;
            // best pairwise merge
            const double before = modularity_oracle(n, edges, label);
            double best_gain = 1e-12;
            std::pair<int, int> merge{-1, -1};
            std::vector<int> present(label.begin(), label.end());
            std::sort(present.begin(), present.end());
            present.erase(std::unique(present.begin(), present.end()), present.end());
            for (std::size_t x = 0; x < present.size(); ++x) {
                for (std::size_t y = x + 1; y < present.size(); ++y) {
                    auto trial = label;
                    for (auto& l : trial) l = l == present[y] ? present[x] : l;
                    const double gain = modularity_oracle(n, edges, trial) - before;
                    if (gain > best_gain) {
                        best_gain = gain;
                        merge = {present[x], present[y]};
                    }
                }
            }
            if (merge.first >= 0) {
                for (auto& l : label) l = l == merge.second ? merge.first : l;
                moved = true;
            }
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            rng.shuffle(std::span<std::size_t>(order));
            for (std::size_t u : order) {
                const double current = modularity_oracle(n, edges, label);
                int best_label = label[u];
                double best_q = current;
                for (int v : adj[u]) {
                    auto trial = label;
                    trial[u] = label[v];
                    const double q = modularity_oracle(n, edges, trial);
                    if (q > best_q + 1e-12) {
                        best_q = q;
                        best_label = label[v];
                    }
                }
                if (best_label != label[u]) {
                    label[u] = best_label;
                    moved = true;
                }
            }
        }
        best = std::max(best, modularity_oracle(n, edges, label));
    }
    return best;
}

/// Exact two-sided permutation p-value over every split of the pooled sample.
/// `stat(a, b)` returns the distance from the null that larger values make extreme.
template <typename Stat>
double permutation_pvalue(const std::vector<double>& a, const std::vector<double>& b, Stat stat) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = pooled.size();
    std::vector<int> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), 1);
    std::sort(pick.begin(), pick.end());
    const double observed = stat(a, b);
    std::size_t total = 0, extreme = 0;
    do {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < n; ++i) (pick[i] ? x : y).push_back(pooled[i]);
        ++total;
        if (stat(x, y) >= observed - 1e-12) ++extreme;
    } while (std::next_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace support
