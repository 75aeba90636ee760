#include "debatenet/graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "debatenet/error.hpp"

namespace debatenet {

namespace {

void check_unique(const std::vector<std::string>& ids, const char* layer) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(ids.size());
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw InputError(std::string("duplicate ") + layer + " node id '" + id + "'");
        }
    }
}

std::optional<NodeIndex> find_id(const std::vector<std::string>& ids, bool sorted,
                                 std::string_view id) {
    if (sorted) {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it != ids.end() && *it == id) return static_cast<NodeIndex>(it - ids.begin());
        return std::nullopt;
    }
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) return std::nullopt;
    return static_cast<NodeIndex>(it - ids.begin());
}

}  // namespace

BipartiteGraph::BipartiteGraph(std::vector<std::string> top_ids,
                               std::vector<std::string> bottom_ids, std::vector<Edge> edges)
    : top_ids_(std::move(top_ids)), bottom_ids_(std::move(bottom_ids)), edges_(std::move(edges)) {
    check_unique(top_ids_, "top");
    check_unique(bottom_ids_, "bottom");
    top_sorted_ = std::is_sorted(top_ids_.begin(), top_ids_.end());
    bottom_sorted_ = std::is_sorted(bottom_ids_.begin(), bottom_ids_.end());
    {
        std::unordered_set<std::string_view> tops(top_ids_.begin(), top_ids_.end());
        for (const auto& id : bottom_ids_) {
            if (tops.count(id)) {
                throw InputError("node id '" + id + "' appears on both layers");
            }
        }
    }
    for (const auto& e : edges_) {
        if (e.top >= top_ids_.size() || e.bottom >= bottom_ids_.size()) {
            throw InputError("edge references a node outside its layer");
        }
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    top_offsets_.assign(top_ids_.size() + 1, 0);
    bottom_offsets_.assign(bottom_ids_.size() + 1, 0);
    for (const auto& e : edges_) {
        ++top_offsets_[e.top + 1];
        ++bottom_offsets_[e.bottom + 1];
    }
    std::partial_sum(top_offsets_.begin(), top_offsets_.end(), top_offsets_.begin());
    std::partial_sum(bottom_offsets_.begin(), bottom_offsets_.end(), bottom_offsets_.begin());

    top_adjacency_.resize(edges_.size());
    bottom_adjacency_.resize(edges_.size());
    std::vector<std::size_t> top_fill(top_offsets_.begin(), top_offsets_.end() - 1);
    std::vector<std::size_t> bottom_fill(bottom_offsets_.begin(), bottom_offsets_.end() - 1);
    // Edges are sorted by (top, bottom), so both adjacency lists come out sorted.
    for (const auto& e : edges_) {
        top_adjacency_[top_fill[e.top]++] = e.bottom;
        bottom_adjacency_[bottom_fill[e.bottom]++] = e.top;
    }
}

std::span<const NodeIndex> BipartiteGraph::top_neighbors(NodeIndex top) const {
    if (top >= top_count()) throw std::out_of_range("top node index out of range");
    return {top_adjacency_.data() + top_offsets_[top], top_offsets_[top + 1] - top_offsets_[top]};
}

std::span<const NodeIndex> BipartiteGraph::bottom_neighbors(NodeIndex bottom) const {
    if (bottom >= bottom_count()) throw std::out_of_range("bottom node index out of range");
    return {bottom_adjacency_.data() + bottom_offsets_[bottom],
            bottom_offsets_[bottom + 1] - bottom_offsets_[bottom]};
}

bool BipartiteGraph::has_edge(NodeIndex top, NodeIndex bottom) const {
    auto nb = top_neighbors(top);
    return std::binary_search(nb.begin(), nb.end(), bottom);
}

std::optional<NodeIndex> BipartiteGraph::find_top(std::string_view id) const {
    return find_id(top_ids_, top_sorted_, id);
}

std::optional<NodeIndex> BipartiteGraph::find_bottom(std::string_view id) const {
    return find_id(bottom_ids_, bottom_sorted_, id);
}

void DegreeSequence::validate() const {
    std::int64_t top_sum = 0;
    std::int64_t bottom_sum = 0;
    for (auto k : top) {
        if (k < 0) throw InputError("negative top degree");
        top_sum += k;
    }
    for (auto d : bottom) {
        if (d < 0) throw InputError("negative bottom degree");
        bottom_sum += d;
    }
    if (top_sum != bottom_sum) {
        throw InputError("degree sums differ between layers (" + std::to_string(top_sum) +
                         " vs " + std::to_string(bottom_sum) + ")");
    }
}

BipartiteGraph build_bipartite(std::span<const BipartiteRecord> records) {
    std::set<std::string> tops;
    std::set<std::string> bottoms;
    for (std::size_t row = 0; row < records.size(); ++row) {
        const auto& r = records[row];
        if (r.verified == r.unverified) {
            throw InputError("record " + std::to_string(row) + ": id '" + r.verified +
                             "' on both layers");
        }
        tops.insert(r.verified);
        bottoms.insert(r.unverified);
    }
    std::vector<std::string> top_ids(tops.begin(), tops.end());
    std::vector<std::string> bottom_ids(bottoms.begin(), bottoms.end());

    auto index_of = [](const std::vector<std::string>& ids, const std::string& id) {
        return static_cast<NodeIndex>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<Edge> edges;
    edges.reserve(records.size());
    for (const auto& r : records) {
        edges.push_back({index_of(top_ids, r.verified), index_of(bottom_ids, r.unverified)});
    }
    BipartiteGraph graph(std::move(top_ids), std::move(bottom_ids), std::move(edges));
    degree_sequence(graph).validate();
    return graph;
}

DegreeSequence degree_sequence(const BipartiteGraph& graph) {
    DegreeSequence ds;
    ds.top.assign(graph.top_count(), 0);
    ds.bottom.assign(graph.bottom_count(), 0);
    for (const auto& e : graph.edges()) {
        ++ds.top[e.top];
        ++ds.bottom[e.bottom];
    }
    return ds;
}

RetweetNetwork::RetweetNetwork(std::vector<std::string> ids, std::vector<Arc> arcs)
    : ids_(std::move(ids)), arcs_(std::move(arcs)) {
    check_unique(ids_, "retweet");
    ids_sorted_ = std::is_sorted(ids_.begin(), ids_.end());
    std::map<std::pair<NodeIndex, NodeIndex>, std::int64_t> merged;
    for (const auto& a : arcs_) {
        if (a.source >= ids_.size() || a.target >= ids_.size()) {
            throw InputError("arc references an unknown node");
        }
        if (a.weight < 1) throw InputError("arc weight must be positive");
        if (a.source == a.target) throw InputError("self-loop arc");
        merged[{a.source, a.target}] += a.weight;
    }
    arcs_.clear();
    for (const auto& [key, w] : merged) arcs_.push_back({key.first, key.second, w});

    std::vector<std::map<NodeIndex, std::int64_t>> adjacency(ids_.size());
    for (const auto& a : arcs_) {
        adjacency[a.source][a.target] += a.weight;
        adjacency[a.target][a.source] += a.weight;
    }
    offsets_.assign(ids_.size() + 1, 0);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        offsets_[i + 1] = offsets_[i] + adjacency[i].size();
        for (const auto& [n, w] : adjacency[i]) neighbors_.push_back({n, w});
    }
}

std::optional<NodeIndex> RetweetNetwork::find(std::string_view id) const {
    return find_id(ids_, ids_sorted_, id);
}

std::span<const WeightedNeighbor> RetweetNetwork::undirected_neighbors(NodeIndex node) const {
    if (node >= node_count()) throw std::out_of_range("retweet node index out of range");
    return {neighbors_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
}

RetweetNetwork build_retweet_network(std::span<const RetweetRecord> records) {
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;
    std::size_t self_loops = 0;
    std::size_t rejected = 0;
    std::vector<std::string> diagnostics;
    for (std::size_t row = 0; row < records.size(); ++row) {
        const auto& r = records[row];
        if (r.count < 1) {
            ++rejected;
            diagnostics.push_back("row " + std::to_string(row) + ": non-positive count " +
                                  std::to_string(r.count));
            continue;
        }
        if (r.retweeter == r.author) {
            ++self_loops;
            continue;
        }
        counts[{r.retweeter, r.author}] += r.count;
    }
    std::set<std::string> nodes;
    for (const auto& [key, _] : counts) {
        nodes.insert(key.first);
        nodes.insert(key.second);
    }
    std::vector<std::string> ids(nodes.begin(), nodes.end());
    auto index_of = [&ids](const std::string& id) {
        return static_cast<NodeIndex>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<Arc> arcs;
    arcs.reserve(counts.size());
    for (const auto& [key, w] : counts) arcs.push_back({index_of(key.first), index_of(key.second), w});

    RetweetNetwork net(std::move(ids), std::move(arcs));
    net.dropped_self_loops_ = self_loops;
    net.rejected_rows_ = rejected;
    net.diagnostics_ = std::move(diagnostics);
    return net;
}

SplitInteractions split_interactions(std::span<const InteractionRecord> records) {
    std::set<std::string> verified;
    for (const auto& r : records) {
        if (r.author_verified) verified.insert(r.author);
        if (r.retweeter_verified.value_or(false)) verified.insert(r.retweeter);
    }
    SplitInteractions out;
    out.retweets.reserve(records.size());
    for (const auto& r : records) {
        out.retweets.push_back({r.retweeter, r.author, r.count});
        if (r.count < 1 || r.retweeter == r.author) continue;
        const bool author_v = verified.count(r.author) > 0;
        const bool retweeter_v = verified.count(r.retweeter) > 0;
        if (author_v == retweeter_v) {
            ++out.same_layer;
        } else if (author_v) {
            out.bipartite.push_back({r.author, r.retweeter});
        } else {
            out.bipartite.push_back({r.retweeter, r.author});
        }
    }
    out.verified.assign(verified.begin(), verified.end());
    return out;
}

}  // namespace debatenet
