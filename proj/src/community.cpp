#include "debatenet/community.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "debatenet/error.hpp"
#include "debatenet/rng.hpp"

namespace debatenet {

UndirectedGraph::UndirectedGraph(std::vector<std::string> ids, std::vector<WeightedEdge> edges)
    : ids_(std::move(ids)) {
    const std::size_t n = ids_.size();
    std::map<std::pair<NodeIndex, NodeIndex>, double> merged;
    for (auto e : edges) {
        if (e.a >= n || e.b >= n) throw InputError("edge references an unknown node");
        if (!(e.weight > 0.0)) throw InputError("edge weights must be positive");
        if (e.a > e.b) std::swap(e.a, e.b);
        merged[{e.a, e.b}] += e.weight;
    }
    self_loops_.assign(n, 0.0);
    strength_.assign(n, 0.0);
    std::vector<std::vector<Neighbor>> adjacency(n);
    for (const auto& [key, w] : merged) {
        edges_.push_back({key.first, key.second, w});
        total_weight_ += w;
        if (key.first == key.second) {
            self_loops_[key.first] += w;
            strength_[key.first] += 2.0 * w;
        } else {
            adjacency[key.first].push_back({key.second, w});
            adjacency[key.second].push_back({key.first, w});
            strength_[key.first] += w;
            strength_[key.second] += w;
        }
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(adjacency[i].begin(), adjacency[i].end(),
                  [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
        offsets_[i + 1] = offsets_[i] + adjacency[i].size();
        adjacency_.insert(adjacency_.end(), adjacency[i].begin(), adjacency[i].end());
    }
}

UndirectedGraph UndirectedGraph::from_projection(const ValidatedProjection& projection) {
    std::vector<WeightedEdge> edges;
    edges.reserve(projection.edges.size());
    for (const auto& e : projection.edges) edges.push_back({e.first, e.second, 1.0});
    return UndirectedGraph(projection.nodes, std::move(edges));
}

std::span<const UndirectedGraph::Neighbor> UndirectedGraph::neighbors(NodeIndex node) const {
    if (node >= node_count()) throw std::out_of_range("node index out of range");
    return {adjacency_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
}

UndirectedGraph UndirectedGraph::induced(std::span<const NodeIndex> nodes) const {
    std::vector<NodeIndex> sorted(nodes.begin(), nodes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::int64_t> remap(node_count(), -1);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        remap.at(sorted[i]) = static_cast<std::int64_t>(i);
        ids.push_back(ids_[sorted[i]]);
    }
    std::vector<WeightedEdge> edges;
    for (const auto& e : edges_) {
        if (remap[e.a] >= 0 && remap[e.b] >= 0) {
            edges.push_back({static_cast<NodeIndex>(remap[e.a]), static_cast<NodeIndex>(remap[e.b]), e.weight});
        }
    }
    return UndirectedGraph(std::move(ids), std::move(edges));
}

std::string to_string(Origin origin) {
    switch (origin) {
        case Origin::louvain_seed: return "louvain-seed";
        case Origin::propagated: return "propagated";
        case Origin::unassigned: return "unassigned";
    }
    return "unassigned";
}

Origin parse_origin(const std::string& name) {
    if (name == "louvain-seed") return Origin::louvain_seed;
    if (name == "propagated") return Origin::propagated;
    if (name == "unassigned") return Origin::unassigned;
    throw InputError("unknown origin '" + name + "'");
}

std::size_t Partition::community_count() const {
    int top = -1;
    for (int l : labels) top = std::max(top, l);
    return static_cast<std::size_t>(top + 1);
}

std::vector<std::size_t> Partition::community_sizes() const {
    std::vector<std::size_t> sizes(community_count(), 0);
    for (int l : labels) {
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

std::map<std::string, int> Partition::as_map() const {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (labels[i] >= 0) out.emplace(ids[i], labels[i]);
    }
    return out;
}

std::map<int, int> renumber_by_size(std::vector<int>& labels) {
    struct Info {
        std::size_t size = 0;
        std::size_t first = 0;
    };
    std::map<int, Info> info;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        auto [it, inserted] = info.try_emplace(labels[i]);
        if (inserted) it->second.first = i;
        ++it->second.size;
    }
    std::vector<std::pair<int, Info>> order(info.begin(), info.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.second.size != b.second.size ? a.second.size > b.second.size : a.second.first < b.second.first;
    });
    std::map<int, int> mapping;
    for (std::size_t k = 0; k < order.size(); ++k) mapping[order[k].first] = static_cast<int>(k);
    for (auto& l : labels) {
        if (l >= 0) l = mapping.at(l);
    }
    return mapping;
}

double modularity(const UndirectedGraph& graph, std::span<const int> labels, double resolution) {
    if (labels.size() != graph.node_count()) throw InputError("label count does not match the graph");
    const double m = graph.total_weight();
    if (m <= 0.0) return 0.0;
    std::unordered_map<int, double> internal;
    std::unordered_map<int, double> total;
    for (const auto& e : graph.edges()) {
        if (labels[e.a] >= 0 && labels[e.a] == labels[e.b]) internal[labels[e.a]] += e.weight;
    }
    for (NodeIndex i = 0; i < graph.node_count(); ++i) {
        if (labels[i] >= 0) total[labels[i]] += graph.strength(i);
    }
    double q = 0.0;
    for (const auto& [c, t] : total) {
        const double in = internal.count(c) ? internal.at(c) : 0.0;
        q += in / m - resolution * (t / (2.0 * m)) * (t / (2.0 * m));
    }
    return q;
}

std::vector<std::vector<NodeIndex>> connected_components(const UndirectedGraph& graph) {
    std::vector<std::vector<NodeIndex>> components;
    std::vector<char> seen(graph.node_count(), 0);
    for (NodeIndex start = 0; start < graph.node_count(); ++start) {
        if (seen[start]) continue;
        std::vector<NodeIndex> members;
        std::queue<NodeIndex> frontier;
        frontier.push(start);
        seen[start] = 1;
        while (!frontier.empty()) {
            const NodeIndex u = frontier.front();
            frontier.pop();
            members.push_back(u);
            for (const auto& nb : graph.neighbors(u)) {
                if (!seen[nb.node]) {
                    seen[nb.node] = 1;
                    frontier.push(nb.node);
                }
            }
        }
        std::sort(members.begin(), members.end());
        components.push_back(std::move(members));
    }
    std::stable_sort(components.begin(), components.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return components;
}

namespace {

// Working graph for one Louvain level.
struct Level {
    std::vector<std::vector<UndirectedGraph::Neighbor>> adjacency;
    std::vector<double> self_loop;
    std::vector<double> strength;
};

Level level_from(const UndirectedGraph& graph) {
    Level level;
    const std::size_t n = graph.node_count();
    level.adjacency.resize(n);
    for (NodeIndex i = 0; i < n; ++i) {
        const auto nb = graph.neighbors(i);
        level.adjacency[i].assign(nb.begin(), nb.end());
        level.self_loop.push_back(graph.self_loop(i));
        level.strength.push_back(graph.strength(i));
    }
    return level;
}

// Moves nodes between communities until no move improves the objective.
// Returns true if any node changed community.
bool local_moving(const Level& level, double resolution, double two_m, Rng& rng, std::vector<int>& community) {
    const std::size_t n = level.adjacency.size();
    std::vector<double> total(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) total[static_cast<std::size_t>(community[i])] += level.strength[i];

    std::vector<NodeIndex> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<NodeIndex>(order));

    std::vector<double> link(n, 0.0);
    std::vector<char> is_touched(n, 0);
    std::vector<int> touched;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (NodeIndex i : order) {
            const int own = community[i];
            const double k = level.strength[i];
            touched.clear();
            touched.push_back(own);
            is_touched[static_cast<std::size_t>(own)] = 1;
            for (const auto& nb : level.adjacency[i]) {
                const auto c = static_cast<std::size_t>(community[nb.node]);
                if (!is_touched[c]) {
                    is_touched[c] = 1;
                    touched.push_back(static_cast<int>(c));
                }
                link[c] += nb.weight;
            }
            total[static_cast<std::size_t>(own)] -= k;
            auto gain = [&](int c) {
                const auto cc = static_cast<std::size_t>(c);
                return link[cc] - resolution * total[cc] * k / two_m;
            };
            // Stay put unless another community is strictly better.
            int best = own;
            double best_gain = gain(own);
            for (int c : touched) {
                const double g = gain(c);
                if (g > best_gain + 1e-12) {
                    best = c;
                    best_gain = g;
                }
            }
            total[static_cast<std::size_t>(best)] += k;
            for (int c : touched) {
                link[static_cast<std::size_t>(c)] = 0.0;
                is_touched[static_cast<std::size_t>(c)] = 0;
            }
            if (best != own) {
                community[i] = best;
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

// Collapses communities into nodes. `community` is renumbered to 0..k-1.
Level aggregate(const Level& level, std::vector<int>& community) {
    std::map<int, int> dense;
    for (int c : community) dense.emplace(c, 0);
    int next = 0;
    for (auto& [c, idx] : dense) idx = next++;
    for (auto& c : community) c = dense.at(c);

    Level out;
    const auto k = static_cast<std::size_t>(next);
    out.self_loop.assign(k, 0.0);
    out.strength.assign(k, 0.0);
    std::vector<std::map<NodeIndex, double>> links(k);
    for (std::size_t i = 0; i < level.adjacency.size(); ++i) {
        const auto ci = static_cast<std::size_t>(community[i]);
        out.self_loop[ci] += level.self_loop[i];
        out.strength[ci] += level.strength[i];
        for (const auto& nb : level.adjacency[i]) {
            const auto cj = static_cast<std::size_t>(community[nb.node]);
            if (ci == cj) {
                if (i < nb.node) out.self_loop[ci] += nb.weight;
            } else {
                links[ci][static_cast<NodeIndex>(cj)] += nb.weight;
            }
        }
    }
    out.adjacency.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        for (const auto& [d, w] : links[c]) out.adjacency[c].push_back({d, w});
    }
    return out;
}

}  // namespace

Partition louvain(const UndirectedGraph& graph, const LouvainOptions& options) {
    if (graph.node_count() == 0) throw InputError("Louvain needs at least one node");
    if (!(options.resolution > 0.0)) throw InputError("resolution must be positive");

    const std::size_t n = graph.node_count();
    Partition result;
    result.ids = graph.ids();
    result.origins.assign(n, Origin::louvain_seed);
    std::vector<int> membership(n);
    std::iota(membership.begin(), membership.end(), 0);

    const double two_m = 2.0 * graph.total_weight();
    result.pass_modularity.push_back(modularity(graph, membership, options.resolution));
    if (two_m > 0.0) {
        Rng rng(options.seed);
        Level level = level_from(graph);
        while (true) {
            std::vector<int> community(level.adjacency.size());
            std::iota(community.begin(), community.end(), 0);
            if (!local_moving(level, options.resolution, two_m, rng, community)) break;
            level = aggregate(level, community);
            for (auto& m : membership) m = community[static_cast<std::size_t>(m)];
            result.pass_modularity.push_back(modularity(graph, membership, options.resolution));
            if (level.adjacency.size() == 1) break;
        }
    }
    renumber_by_size(membership);
    result.labels = std::move(membership);
    result.modularity = modularity(graph, result.labels, 1.0);
    return result;
}

CommunityDetection detect_communities(const UndirectedGraph& graph, std::size_t min_component_size,
                                      const LouvainOptions& options) {
    CommunityDetection out;
    std::vector<NodeIndex> kept;
    for (const auto& component : connected_components(graph)) {
        out.component_sizes.push_back(component.size());
        if (component.size() >= min_component_size) kept.insert(kept.end(), component.begin(), component.end());
    }
    out.dropped_nodes = graph.node_count() - kept.size();

    Partition& p = out.partition;
    p.ids = graph.ids();
    p.labels.assign(graph.node_count(), -1);
    p.origins.assign(graph.node_count(), Origin::unassigned);
    if (kept.empty()) {
        p.pass_modularity.push_back(0.0);
        return out;
    }
    std::sort(kept.begin(), kept.end());
    const UndirectedGraph sub = graph.induced(kept);
    Partition inner = louvain(sub, options);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        p.labels[kept[i]] = inner.labels[i];
        p.origins[kept[i]] = Origin::louvain_seed;
    }
    p.modularity = inner.modularity;
    p.pass_modularity = std::move(inner.pass_modularity);
    return out;
}

Partition label_propagation(const RetweetNetwork& network, const std::map<std::string, int>& seeds,
                            const PropagationOptions& options) {
    if (seeds.empty()) throw InputError("label propagation needs at least one seed");
    if (options.max_sweeps <= 0) throw InputError("max_sweeps must be positive");
    const std::size_t n = network.node_count();
    std::vector<int> labels(n, -1);
    std::vector<char> frozen(n, 0);
    std::vector<std::string> missing;
    for (const auto& [id, label] : seeds) {
        if (label < 0) throw InputError("seed '" + id + "' has a negative label");
        auto idx = network.find(id);
        if (!idx) {
            missing.push_back(id);
            continue;
        }
        labels[*idx] = label;
        frozen[*idx] = 1;
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t k = 0; k < missing.size(); ++k) list += (k ? ", " : "") + missing[k];
        throw InputError("seed nodes missing from the retweet network: " + list);
    }

    Rng rng(options.seed);
    std::vector<NodeIndex> order;
    for (NodeIndex i = 0; i < n; ++i) {
        if (!frozen[i]) order.push_back(i);
    }

    Partition result;
    result.converged = false;
    std::map<int, std::int64_t> weight;
    std::vector<int> best;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        result.sweeps = static_cast<std::size_t>(sweep);
        // Unlabeled nodes only see labels that existed when the sweep began, so labels
        // advance one hop per sweep; labeled nodes update asynchronously.
        const std::vector<int> snapshot = labels;
        rng.shuffle(std::span<NodeIndex>(order));
        bool changed = false;
        for (NodeIndex u : order) {
            const bool was_labeled = labels[u] >= 0;
            const auto& view = was_labeled ? labels : snapshot;
            weight.clear();
            for (const auto& nb : network.undirected_neighbors(u)) {
                const int l = view[nb.node];
                if (l >= 0) weight[l] += nb.weight;
            }
            if (weight.empty()) continue;
            std::int64_t top = 0;
            for (const auto& [l, w] : weight) top = std::max(top, w);
            best.clear();
            for (const auto& [l, w] : weight) {
                if (w == top) best.push_back(l);
            }
            if (was_labeled && std::find(best.begin(), best.end(), labels[u]) != best.end()) continue;
            const int chosen = best.size() == 1 ? best.front() : best[rng.below(best.size())];
            if (chosen != labels[u]) {
                labels[u] = chosen;
                changed = true;
            }
        }
        if (!changed) {
            result.converged = true;
            break;
        }
    }

    result.ids = network.ids();
    result.origins.resize(n);
    for (NodeIndex i = 0; i < n; ++i) {
        result.origins[i] = frozen[i] ? Origin::louvain_seed : (labels[i] >= 0 ? Origin::propagated : Origin::unassigned);
    }
    result.labels = std::move(labels);
    return result;
}

}  // namespace debatenet
