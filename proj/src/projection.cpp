#include "debatenet/projection.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <thread>
#include <unordered_map>

#include "debatenet/error.hpp"

namespace debatenet {

CoOccurrenceTable::CoOccurrenceTable(std::vector<CoOccurrence> entries) : entries_(std::move(entries)) {
    for (auto& e : entries_) {
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(entries_.begin(), entries_.end(), [](const CoOccurrence& a, const CoOccurrence& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
}

std::int64_t CoOccurrenceTable::count(NodeIndex a, NodeIndex b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{a, b},
                               [](const CoOccurrence& e, const std::pair<NodeIndex, NodeIndex>& key) {
                                   return e.first != key.first ? e.first < key.first : e.second < key.second;
                               });
    if (it != entries_.end() && it->first == a && it->second == b) return it->count;
    return 0;
}

CoOccurrenceTable co_occurrences(const BipartiteGraph& graph) {
    std::unordered_map<std::uint64_t, std::int64_t> counts;
    for (NodeIndex b = 0; b < graph.bottom_count(); ++b) {
        const auto tops = graph.bottom_neighbors(b);
        for (std::size_t x = 0; x < tops.size(); ++x) {
            for (std::size_t y = x + 1; y < tops.size(); ++y) {
                ++counts[(static_cast<std::uint64_t>(tops[x]) << 32) | tops[y]];
            }
        }
    }
    std::vector<CoOccurrence> entries;
    entries.reserve(counts.size());
    for (const auto& [key, c] : counts) {
        entries.push_back({static_cast<NodeIndex>(key >> 32), static_cast<NodeIndex>(key & 0xffffffffu), c});
    }
    return CoOccurrenceTable(std::move(entries));
}

double poisson_binomial_upper_tail(std::span<const double> probs, std::int64_t observed) {
    if (observed <= 0) return 1.0;
    if (static_cast<std::size_t>(observed) > probs.size()) return 0.0;
    const auto v = static_cast<std::size_t>(observed);
    // dp[c] = P(count == c) for c < v; dp[v] = P(count >= v).
    std::vector<double> dp(v + 1, 0.0);
    dp[0] = 1.0;
    std::size_t reach = 0;  // highest state with non-zero mass
    for (double q : probs) {
        if (q <= 0.0) continue;
        const std::size_t top = std::min(reach + 1, v);
        if (top == v) dp[v] += dp[v - 1] * q;
        for (std::size_t c = std::min(top, v - 1); c >= 1; --c) {
            dp[c] = dp[c] * (1.0 - q) + dp[c - 1] * q;
        }
        dp[0] *= (1.0 - q);
        reach = top;
    }
    return std::min(1.0, dp[v]);
}

double poisson_upper_tail(double rate, std::int64_t observed) {
    if (observed <= 0) return 1.0;
    if (rate <= 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(observed), rate);
}

namespace {

void cooccurrence_probs(const BicmModel& model, std::span<const double> row_i, NodeIndex j,
                        std::vector<double>& out) {
    out.resize(model.bottom_count());
    for (NodeIndex a = 0; a < model.bottom_count(); ++a) out[a] = row_i[a] * model.probability(j, a);
}

double tail_from_probs(const std::vector<double>& probs, std::int64_t observed, bool exact) {
    if (exact) return poisson_binomial_upper_tail(probs, observed);
    double rate = 0.0;
    for (double q : probs) rate += q;
    return poisson_upper_tail(rate, observed);
}

}  // namespace

double pair_pvalue(const BicmModel& model, NodeIndex i, NodeIndex j, std::int64_t observed,
                   std::size_t exact_threshold) {
    if (i >= model.top_count() || j >= model.top_count()) {
        throw std::out_of_range("top node index outside the model");
    }
    if (observed < 0) throw InputError("observed co-occurrence must be non-negative");
    if (static_cast<std::size_t>(observed) > model.bottom_count()) {
        throw InputError("observed co-occurrence " + std::to_string(observed) +
                         " exceeds the bottom layer size " + std::to_string(model.bottom_count()));
    }
    std::vector<double> row(model.bottom_count());
    for (NodeIndex a = 0; a < model.bottom_count(); ++a) row[a] = model.probability(i, a);
    std::vector<double> probs;
    cooccurrence_probs(model, row, j, probs);
    return tail_from_probs(probs, observed, model.bottom_count() <= exact_threshold);
}

std::string to_string(Correction c) {
    switch (c) {
        case Correction::fdr: return "fdr";
        case Correction::bonferroni: return "bonferroni";
        case Correction::none: return "none";
    }
    return "fdr";
}

Correction parse_correction(const std::string& name) {
    if (name == "fdr") return Correction::fdr;
    if (name == "bonferroni") return Correction::bonferroni;
    if (name == "none") return Correction::none;
    throw InputError("unknown correction '" + name + "' (expected fdr, bonferroni or none)");
}

std::optional<double> benjamini_hochberg_threshold(std::span<const double> pvalues, double alpha) {
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    for (std::size_t k = sorted.size(); k >= 1; --k) {
        if (sorted[k - 1] <= static_cast<double>(k) * alpha / m) return sorted[k - 1];
    }
    return std::nullopt;
}

ValidatedProjection validate_projection(const BipartiteGraph& graph, const BicmModel& model,
                                        const ValidationOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw InputError("alpha must lie strictly between 0 and 1");
    }
    if (graph.top_count() != model.top_count() || graph.bottom_count() != model.bottom_count()) {
        throw InputError("graph dimensions do not match the model");
    }
    const CoOccurrenceTable table = co_occurrences(graph);
    const auto entries = table.entries();
    const bool exact = model.bottom_count() <= options.exact_threshold;

    std::vector<double> pvalues(entries.size(), 1.0);
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(model.bottom_count());
        std::vector<double> probs;
        NodeIndex cached = static_cast<NodeIndex>(-1);
        for (std::size_t e = begin; e < end; ++e) {
            const auto& entry = entries[e];
            if (entry.first != cached) {
                for (NodeIndex a = 0; a < model.bottom_count(); ++a) row[a] = model.probability(entry.first, a);
                cached = entry.first;
            }
            cooccurrence_probs(model, row, entry.second, probs);
            pvalues[e] = tail_from_probs(probs, entry.count, exact);
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(entries.size())));
    if (threads <= 1) {
        work(0, entries.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (entries.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(entries.size(), t * chunk);
            const std::size_t end = std::min(entries.size(), begin + chunk);
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    ValidatedProjection out;
    out.nodes = graph.top_ids();
    out.alpha = options.alpha;
    out.correction = options.correction;
    out.hypotheses = entries.size();
    out.approximate = !exact && !entries.empty();
    out.exact_threshold = options.exact_threshold;
    if (!entries.empty()) {
        switch (options.correction) {
            case Correction::fdr:
                out.threshold = benjamini_hochberg_threshold(pvalues, options.alpha);
                break;
            case Correction::bonferroni:
                out.threshold = options.alpha / static_cast<double>(entries.size());
                break;
            case Correction::none:
                out.threshold = options.alpha;
                break;
        }
    }
    if (out.threshold) {
        for (std::size_t e = 0; e < entries.size(); ++e) {
            if (pvalues[e] <= *out.threshold) {
                out.edges.push_back({entries[e].first, entries[e].second, entries[e].count, pvalues[e]});
            }
        }
    }
    return out;
}

}  // namespace debatenet
