#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "debatenet/graph.hpp"
#include "debatenet/projection.hpp"

namespace debatenet {

struct WeightedEdge {
    NodeIndex a;
    NodeIndex b;
    double weight = 1.0;
};

// Undirected weighted graph. Parallel edges are merged; self-loops are kept.
class UndirectedGraph {
public:
    struct Neighbor {
        NodeIndex node;
        double weight;
    };

    UndirectedGraph() = default;
    UndirectedGraph(std::vector<std::string> ids, std::vector<WeightedEdge> edges);

    static UndirectedGraph from_projection(const ValidatedProjection& projection);

    std::size_t node_count() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const WeightedEdge> edges() const noexcept { return edges_; }
    /// Excludes the self-loop, which is reported by self_loop().
    std::span<const Neighbor> neighbors(NodeIndex node) const;
    double self_loop(NodeIndex node) const { return self_loops_.at(node); }
    /// Sum of incident edge weights, self-loops counted twice.
    double strength(NodeIndex node) const { return strength_.at(node); }
    double total_weight() const noexcept { return total_weight_; }

    UndirectedGraph induced(std::span<const NodeIndex> nodes) const;

private:
    std::vector<std::string> ids_;
    std::vector<WeightedEdge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> adjacency_;
    std::vector<double> self_loops_;
    std::vector<double> strength_;
    double total_weight_ = 0.0;
};

enum class Origin { louvain_seed, propagated, unassigned };

std::string to_string(Origin origin);
Origin parse_origin(const std::string& name);

// Node -> community assignment. Labels are 0..k-1 with 0 the largest community;
// -1 marks an unassigned node.
struct Partition {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<Origin> origins;
    double modularity = 0.0;               // Louvain only, at resolution 1
    std::vector<double> pass_modularity;   // objective after every Louvain level
    std::size_t sweeps = 0;                // label propagation only
    bool converged = true;

    std::size_t community_count() const;
    std::vector<std::size_t> community_sizes() const;
    std::map<std::string, int> as_map() const;  // assigned nodes only
};

/// Relabels communities 0..k-1 by descending size, ties by smallest member index.
/// Returns the mapping old label -> new label.
std::map<int, int> renumber_by_size(std::vector<int>& labels);

/// Newman modularity at the given resolution. Unassigned nodes (-1) contribute nothing.
double modularity(const UndirectedGraph& graph, std::span<const int> labels, double resolution = 1.0);

std::vector<std::vector<NodeIndex>> connected_components(const UndirectedGraph& graph);

struct LouvainOptions {
    double resolution = 1.0;
    std::uint64_t seed = 0;
};

/// Multi-level Louvain. Throws InputError for an empty graph or non-positive resolution.
Partition louvain(const UndirectedGraph& graph, const LouvainOptions& options = {});

struct CommunityDetection {
    Partition partition;  // covers every node; dropped nodes are unassigned
    std::vector<std::size_t> component_sizes;  // descending, before filtering
    std::size_t dropped_nodes = 0;
};

/// Drops nodes in components smaller than min_component_size, then runs Louvain on
/// the rest.
CommunityDetection detect_communities(const UndirectedGraph& graph, std::size_t min_component_size,
                                      const LouvainOptions& options = {});

struct PropagationOptions {
    std::uint64_t seed = 0;
    int max_sweeps = 100;
};

/// Seeded label propagation over the retweet network. Seeds keep their labels as given,
/// with no renumbering afterwards. Throws
/// InputError when seeds are empty or reference nodes missing from the network.
Partition label_propagation(const RetweetNetwork& network, const std::map<std::string, int>& seeds,
                            const PropagationOptions& options = {});

}  // namespace debatenet
