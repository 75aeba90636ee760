#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace debatenet {

using NodeIndex = std::uint32_t;

struct Edge {
    NodeIndex top;
    NodeIndex bottom;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// One verified/unverified interaction. Direction is irrelevant for the bipartite view.
struct BipartiteRecord {
    std::string verified;
    std::string unverified;
};

// Unweighted two-layer network. Top layer holds verified users, bottom layer
// unverified users. Edges are binary and stored sorted by (top, bottom).
class BipartiteGraph {
public:
    BipartiteGraph() = default;

    // Ids within each layer must be unique and the two layers disjoint. Node index
    // order follows the order of the id vectors. Duplicate edges collapse.
    BipartiteGraph(std::vector<std::string> top_ids, std::vector<std::string> bottom_ids,
                   std::vector<Edge> edges);

    std::size_t top_count() const noexcept { return top_ids_.size(); }
    std::size_t bottom_count() const noexcept { return bottom_ids_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const std::vector<std::string>& top_ids() const noexcept { return top_ids_; }
    const std::vector<std::string>& bottom_ids() const noexcept { return bottom_ids_; }
    std::span<const Edge> edges() const noexcept { return edges_; }

    std::span<const NodeIndex> top_neighbors(NodeIndex top) const;
    std::span<const NodeIndex> bottom_neighbors(NodeIndex bottom) const;
    bool has_edge(NodeIndex top, NodeIndex bottom) const;

    std::optional<NodeIndex> find_top(std::string_view id) const;
    std::optional<NodeIndex> find_bottom(std::string_view id) const;

    friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
        return a.top_ids_ == b.top_ids_ && a.bottom_ids_ == b.bottom_ids_ && a.edges_ == b.edges_;
    }

private:
    std::vector<std::string> top_ids_;
    std::vector<std::string> bottom_ids_;
    std::vector<Edge> edges_;
    // CSR adjacency in both directions.
    std::vector<std::size_t> top_offsets_;
    std::vector<NodeIndex> top_adjacency_;
    std::vector<std::size_t> bottom_offsets_;
    std::vector<NodeIndex> bottom_adjacency_;
    bool top_sorted_ = true;
    bool bottom_sorted_ = true;
};

struct DegreeSequence {
    std::vector<std::int64_t> top;
    std::vector<std::int64_t> bottom;

    /// Throws InputError on negative degrees or unequal layer sums.
    void validate() const;
};

/// Builds the bipartite network with node ids sorted in each layer.
/// Throws InputError if a record carries the same id on both layers, or if an id
/// appears on both layers across records.
BipartiteGraph build_bipartite(std::span<const BipartiteRecord> records);

DegreeSequence degree_sequence(const BipartiteGraph& graph);

struct RetweetRecord {
    std::string retweeter;
    std::string author;
    std::int64_t count = 1;
};

struct Arc {
    NodeIndex source;  // retweeter
    NodeIndex target;  // author
    std::int64_t weight;

    friend bool operator==(const Arc&, const Arc&) = default;
};

struct WeightedNeighbor {
    NodeIndex node;
    std::int64_t weight;
};

// Directed weighted retweet network. Arcs are aggregated per (retweeter, author)
// and sorted; node ids are sorted.
class RetweetNetwork {
public:
    RetweetNetwork() = default;
    RetweetNetwork(std::vector<std::string> ids, std::vector<Arc> arcs);

    std::size_t node_count() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const Arc> arcs() const noexcept { return arcs_; }
    std::optional<NodeIndex> find(std::string_view id) const;

    /// Neighbors with in- and out-arc weights summed, sorted by node index.
    std::span<const WeightedNeighbor> undirected_neighbors(NodeIndex node) const;

    std::size_t dropped_self_loops() const noexcept { return dropped_self_loops_; }
    std::size_t rejected_rows() const noexcept { return rejected_rows_; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    friend RetweetNetwork build_retweet_network(std::span<const RetweetRecord>);

    std::vector<std::string> ids_;
    std::vector<Arc> arcs_;
    std::vector<std::size_t> offsets_;
    std::vector<WeightedNeighbor> neighbors_;
    std::size_t dropped_self_loops_ = 0;
    std::size_t rejected_rows_ = 0;
    std::vector<std::string> diagnostics_;
    bool ids_sorted_ = true;
};

/// Aggregates counts per (retweeter, author). Self-retweets are dropped and rows with
/// non-positive counts rejected; both are counted on the returned network.
RetweetNetwork build_retweet_network(std::span<const RetweetRecord> records);

/// One row of the interaction table: `retweeter` retweeted `author` `count` times.
struct InteractionRecord {
    std::string retweeter;
    std::string author;
    bool author_verified = false;
    std::optional<bool> retweeter_verified;
    std::int64_t count = 1;
};

struct SplitInteractions {
    std::vector<BipartiteRecord> bipartite;  // verified/unverified pairs, either direction
    std::vector<RetweetRecord> retweets;     // every row
    std::vector<std::string> verified;       // sorted
    std::size_t same_layer = 0;              // rows left out of the bipartite view
};

/// A user is verified when any row flags them so. Rows joining two verified or two
/// unverified users only enter the retweet network.
SplitInteractions split_interactions(std::span<const InteractionRecord> records);

}  // namespace debatenet
