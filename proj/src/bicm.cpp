#include "debatenet/bicm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "debatenet/error.hpp"
#include "debatenet/rng.hpp"

namespace debatenet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// p = 1 / (1 + exp(-s)) for s = log(x) + log(y).
inline double logistic(double s) {
    if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

inline double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

std::string pad_index(std::size_t i, std::size_t n) {
    std::string digits = std::to_string(i);
    const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
    return std::string(width - digits.size(), '0') + digits;
}

// A complete bipartite subproblem: every listed top may link to every listed bottom,
// with residual degrees still to be explained.
struct Subproblem {
    std::vector<NodeIndex> tops;
    std::vector<std::int64_t> top_residual;
    std::vector<NodeIndex> bottoms;
    std::vector<std::int64_t> bottom_residual;
};

struct FitState {
    std::vector<double> top_mult;
    std::vector<double> bottom_mult;
    std::vector<int> top_block;
    std::vector<int> bottom_block;
    std::vector<Edge> frozen_ones;
    SolverInfo info;
};

[[noreturn]] void not_graphical() {
    throw InputError("degree sequence cannot be realized by any bipartite graph");
}

// Removes nodes whose row or column is forced. Returns when nothing changes.
void peel(Subproblem& sub, FitState& state) {
    bool changed = true;
    while (changed) {
        changed = false;
        const auto n_bottom = static_cast<std::int64_t>(sub.bottoms.size());
        std::vector<NodeIndex> tops;
        std::vector<std::int64_t> top_res;
        for (std::size_t t = 0; t < sub.tops.size(); ++t) {
            const auto r = sub.top_residual[t];
            if (r < 0 || r > n_bottom) not_graphical();
            if (r == 0) {
                changed = true;
            } else if (r == n_bottom) {
                for (std::size_t b = 0; b < sub.bottoms.size(); ++b) {
                    state.frozen_ones.push_back({sub.tops[t], sub.bottoms[b]});
                    --sub.bottom_residual[b];
                }
                state.top_mult[sub.tops[t]] = kInf;
                changed = true;
            } else {
                tops.push_back(sub.tops[t]);
                top_res.push_back(r);
            }
        }
        sub.tops = std::move(tops);
        sub.top_residual = std::move(top_res);

        const auto n_top = static_cast<std::int64_t>(sub.tops.size());
        std::vector<NodeIndex> bottoms;
        std::vector<std::int64_t> bottom_res;
        for (std::size_t b = 0; b < sub.bottoms.size(); ++b) {
            const auto r = sub.bottom_residual[b];
            if (r < 0 || r > n_top) not_graphical();
            if (r == 0) {
                changed = true;
            } else if (r == n_top) {
                for (std::size_t t = 0; t < sub.tops.size(); ++t) {
                    state.frozen_ones.push_back({sub.tops[t], sub.bottoms[b]});
                    --sub.top_residual[t];
                }
                state.bottom_mult[sub.bottoms[b]] = kInf;
                changed = true;
            } else {
                bottoms.push_back(sub.bottoms[b]);
                bottom_res.push_back(r);
            }
        }
        sub.bottoms = std::move(bottoms);
        sub.bottom_residual = std::move(bottom_res);
    }
}

// Looks for a tight Gale-Ryser cut. For the k tops of largest residual degree,
// sum(top residual) <= sum_b min(bottom residual, k). Equality forces those tops to
// link to every bottom of residual >= k and forces every bottom of residual <= k to
// link only to them, which splits the problem in two.
bool split_on_tight_cut(Subproblem& sub, FitState& state, std::vector<Subproblem>& pending) {
    const std::size_t n_top = sub.tops.size();
    std::vector<std::size_t> order(n_top);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sub.top_residual[a] > sub.top_residual[b];
    });
    std::vector<std::int64_t> bottom_sorted = sub.bottom_residual;
    std::sort(bottom_sorted.begin(), bottom_sorted.end());
    std::vector<std::int64_t> bottom_prefix(bottom_sorted.size() + 1, 0);
    for (std::size_t b = 0; b < bottom_sorted.size(); ++b) {
        bottom_prefix[b + 1] = bottom_prefix[b] + bottom_sorted[b];
    }
    auto capacity = [&](std::int64_t k) {
        const auto below = static_cast<std::size_t>(
            std::lower_bound(bottom_sorted.begin(), bottom_sorted.end(), k) - bottom_sorted.begin());
        return bottom_prefix[below] + k * static_cast<std::int64_t>(bottom_sorted.size() - below);
    };

    std::int64_t prefix = 0;
    for (std::size_t k = 1; k < n_top; ++k) {
        prefix += sub.top_residual[order[k - 1]];
        // Within a run of equal degrees the slack is concave, so boundaries suffice.
        if (sub.top_residual[order[k - 1]] == sub.top_residual[order[k]]) continue;
        const auto kk = static_cast<std::int64_t>(k);
        const auto cap = capacity(kk);
        if (prefix > cap) not_graphical();
        if (prefix < cap) continue;

        Subproblem inner;  // the k tops with low-degree bottoms
        Subproblem outer;  // the other tops with high-degree bottoms
        std::int64_t full_columns = 0;
        for (std::size_t b = 0; b < sub.bottoms.size(); ++b) {
            const auto r = sub.bottom_residual[b];
            if (r >= kk) {
                ++full_columns;
                for (std::size_t i = 0; i < k; ++i) {
                    state.frozen_ones.push_back({sub.tops[order[i]], sub.bottoms[b]});
                }
            }
            if (r < kk) {
                inner.bottoms.push_back(sub.bottoms[b]);
                inner.bottom_residual.push_back(r);
            } else if (r > kk) {
                outer.bottoms.push_back(sub.bottoms[b]);
                outer.bottom_residual.push_back(r - kk);
            }
        }
        for (std::size_t i = 0; i < n_top; ++i) {
            const auto t = order[i];
            if (i < k) {
                inner.tops.push_back(sub.tops[t]);
                inner.top_residual.push_back(sub.top_residual[t] - full_columns);
            } else {
                outer.tops.push_back(sub.tops[t]);
                outer.top_residual.push_back(sub.top_residual[t]);
            }
        }
        pending.push_back(std::move(inner));
        pending.push_back(std::move(outer));
        return true;
    }
    return false;
}

// Reduced system: one unknown per group of nodes sharing a residual degree.
struct ReducedLayer {
    std::vector<double> degree;
    std::vector<double> count;
    std::vector<std::size_t> group_of;  // per node in the subproblem
};

ReducedLayer reduce(const std::vector<std::int64_t>& residual, bool group) {
    ReducedLayer layer;
    layer.group_of.resize(residual.size());
    if (!group) {
        for (std::size_t i = 0; i < residual.size(); ++i) {
            layer.degree.push_back(static_cast<double>(residual[i]));
            layer.count.push_back(1.0);
            layer.group_of[i] = i;
        }
        return layer;
    }
    std::map<std::int64_t, std::size_t> index;
    for (auto r : residual) index.emplace(r, 0);
    for (auto& [value, idx] : index) {
        idx = layer.degree.size();
        layer.degree.push_back(static_cast<double>(value));
        layer.count.push_back(0.0);
    }
    for (std::size_t i = 0; i < residual.size(); ++i) {
        const auto g = index.at(residual[i]);
        layer.group_of[i] = g;
        layer.count[g] += 1.0;
    }
    return layer;
}

class InteriorSolver {
public:
    InteriorSolver(const ReducedLayer& top, const ReducedLayer& bottom)
        : top_(top), bottom_(bottom), u_(top.degree.size()), v_(bottom.degree.size()) {
        double edges = 0.0;
        for (std::size_t g = 0; g < top_.degree.size(); ++g) edges += top_.degree[g] * top_.count[g];
        const double root = std::sqrt(edges);
        for (std::size_t g = 0; g < u_.size(); ++g) u_[g] = std::log(top_.degree[g] / root);
        for (std::size_t h = 0; h < v_.size(); ++h) v_[h] = std::log(bottom_.degree[h] / root);
    }

    const std::vector<double>& top_log() const { return u_; }
    const std::vector<double>& bottom_log() const { return v_; }

    double residual() const {
        double worst = 0.0;
        std::vector<double> bottom_expected(v_.size(), 0.0);
        for (std::size_t g = 0; g < u_.size(); ++g) {
            double expected = 0.0;
            for (std::size_t h = 0; h < v_.size(); ++h) {
                const double p = logistic(u_[g] + v_[h]);
                expected += bottom_.count[h] * p;
                bottom_expected[h] += top_.count[g] * p;
            }
            worst = std::max(worst, relative(expected, top_.degree[g]));
        }
        for (std::size_t h = 0; h < v_.size(); ++h) {
            worst = std::max(worst, relative(bottom_expected[h], bottom_.degree[h]));
        }
        return worst;
    }

    // One Gauss-Seidel sweep of x <- k / sum(n y / (1 + x y)), then the same for y.
    void fixed_point_sweep() {
        for (std::size_t g = 0; g < u_.size(); ++g) {
            double denom = 0.0;
            for (std::size_t h = 0; h < v_.size(); ++h) {
                // y / (1 + x y) = exp(v) * (1 - p)
                denom += bottom_.count[h] * std::exp(v_[h]) * (1.0 - logistic(u_[g] + v_[h]));
            }
            u_[g] = std::log(top_.degree[g] / denom);
        }
        for (std::size_t h = 0; h < v_.size(); ++h) {
            double denom = 0.0;
            for (std::size_t g = 0; g < u_.size(); ++g) {
                denom += top_.count[g] * std::exp(u_[g]) * (1.0 - logistic(u_[g] + v_[h]));
            }
            v_[h] = std::log(bottom_.degree[h] / denom);
        }
    }

    // Damped Newton step on the negative log-likelihood in log-multiplier space.
    // Returns false when no descent step could be found.
    bool newton_step() {
        const std::size_t nu = u_.size();
        const std::size_t nv = v_.size();
        const std::size_t n = nu + nv;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t g = 0; g < nu; ++g) {
            for (std::size_t h = 0; h < nv; ++h) {
                const double p = logistic(u_[g] + v_[h]);
                const double w = p * (1.0 - p);
                const double cn = top_.count[g] * bottom_.count[h];
                const auto gi = static_cast<Eigen::Index>(g);
                const auto hi = static_cast<Eigen::Index>(nu + h);
                grad(gi) += cn * p;
                grad(hi) += cn * p;
                hess(gi, gi) += cn * w;
                hess(hi, hi) += cn * w;
                hess(gi, hi) += cn * w;
                hess(hi, gi) += cn * w;
            }
        }
        for (std::size_t g = 0; g < nu; ++g) grad(static_cast<Eigen::Index>(g)) -= top_.count[g] * top_.degree[g];
        for (std::size_t h = 0; h < nv; ++h) {
            grad(static_cast<Eigen::Index>(nu + h)) -= bottom_.count[h] * bottom_.degree[h];
        }

        const double f0 = objective(u_, v_);
        const Eigen::VectorXd diag = hess.diagonal();
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd damped = hess;
            // The objective is flat along x -> c x, y -> y / c; the ridge pins that direction.
            damped.diagonal() += damping_ * diag + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            if (!step.allFinite()) {
                damping_ *= 10.0;
                continue;
            }
            const double slope = grad.dot(step);
            double scale = 1.0;
            for (int ls = 0; ls < 40; ++ls) {
                std::vector<double> u = u_;
                std::vector<double> v = v_;
                for (std::size_t g = 0; g < nu; ++g) u[g] += scale * step(static_cast<Eigen::Index>(g));
                for (std::size_t h = 0; h < nv; ++h) v[h] += scale * step(static_cast<Eigen::Index>(nu + h));
                const double f = objective(u, v);
                if (std::isfinite(f) && f <= f0 + 1e-4 * scale * slope) {
                    u_ = std::move(u);
                    v_ = std::move(v);
                    damping_ = std::max(damping_ * 0.1, 1e-12);
                    return true;
                }
                scale *= 0.5;
            }
            damping_ *= 10.0;
        }
        return false;
    }

private:
    static double relative(double expected, double observed) {
        return std::abs(expected - observed) / std::max(1.0, observed);
    }

    double objective(const std::vector<double>& u, const std::vector<double>& v) const {
        double f = 0.0;
        for (std::size_t g = 0; g < u.size(); ++g) {
            for (std::size_t h = 0; h < v.size(); ++h) {
                f += top_.count[g] * bottom_.count[h] * softplus(u[g] + v[h]);
            }
            f -= top_.count[g] * top_.degree[g] * u[g];
        }
        for (std::size_t h = 0; h < v.size(); ++h) f -= bottom_.count[h] * bottom_.degree[h] * v[h];
        return f;
    }

    const ReducedLayer& top_;
    const ReducedLayer& bottom_;
    std::vector<double> u_;
    std::vector<double> v_;
    double damping_ = 1e-6;
};

void solve_interior(const Subproblem& sub, int block, const BicmOptions& options, FitState& state,
                    std::size_t& budget) {
    const ReducedLayer top = reduce(sub.top_residual, options.group_degrees);
    const ReducedLayer bottom = reduce(sub.bottom_residual, options.group_degrees);
    state.info.unknowns += top.degree.size() + bottom.degree.size();

    InteriorSolver solver(top, bottom);
    double res = solver.residual();
    std::vector<double> history{res};
    bool newton = false;
    while (res > options.tol) {
        if (budget == 0) {
            throw ConvergenceError("BiCM fit did not reach tolerance " + std::to_string(options.tol) +
                                       " (residual " + std::to_string(res) + ")",
                                   state.info.trajectory);
        }
        --budget;
        ++state.info.iterations;
        if (!newton) {
            solver.fixed_point_sweep();
        } else {
            ++state.info.newton_steps;
            if (!solver.newton_step()) {
                throw ConvergenceError("BiCM Newton step failed to decrease the objective",
                                       state.info.trajectory);
            }
        }
        res = solver.residual();
        history.push_back(res);
        state.info.trajectory.push_back(res);
        // Fixed point stalls when ten sweeps gain less than 5%.
        if (!newton && history.size() > 10 && res > 0.95 * history[history.size() - 11]) newton = true;
        if (!std::isfinite(res)) newton = true;
    }

    for (std::size_t t = 0; t < sub.tops.size(); ++t) {
        state.top_mult[sub.tops[t]] = std::exp(solver.top_log()[top.group_of[t]]);
        state.top_block[sub.tops[t]] = block;
    }
    for (std::size_t b = 0; b < sub.bottoms.size(); ++b) {
        state.bottom_mult[sub.bottoms[b]] = std::exp(solver.bottom_log()[bottom.group_of[b]]);
        state.bottom_block[sub.bottoms[b]] = block;
    }
}

}  // namespace

BicmModel::BicmModel(std::vector<double> top_multipliers, std::vector<double> bottom_multipliers,
                     std::vector<int> top_block, std::vector<int> bottom_block,
                     std::vector<Edge> frozen_ones, double fit_residual, SolverInfo solver)
    : top_(std::move(top_multipliers)),
      bottom_(std::move(bottom_multipliers)),
      top_block_(std::move(top_block)),
      bottom_block_(std::move(bottom_block)),
      frozen_ones_(std::move(frozen_ones)),
      fit_residual_(fit_residual),
      solver_(std::move(solver)) {
    if (top_block_.size() != top_.size() || bottom_block_.size() != bottom_.size()) {
        throw InputError("block assignment does not match the layer sizes");
    }
    for (std::size_t i = 0; i < top_.size(); ++i) {
        if (!(top_[i] >= 0.0)) throw InputError("top multipliers must be non-negative");
        if (top_block_[i] >= 0 && !std::isfinite(top_[i])) throw InputError("interior multiplier must be finite");
    }
    for (std::size_t a = 0; a < bottom_.size(); ++a) {
        if (!(bottom_[a] >= 0.0)) throw InputError("bottom multipliers must be non-negative");
        if (bottom_block_[a] >= 0 && !std::isfinite(bottom_[a])) throw InputError("interior multiplier must be finite");
    }
    std::sort(frozen_ones_.begin(), frozen_ones_.end());
    frozen_ones_.erase(std::unique(frozen_ones_.begin(), frozen_ones_.end()), frozen_ones_.end());
    for (const auto& e : frozen_ones_) {
        if (e.top >= top_.size() || e.bottom >= bottom_.size()) {
            throw InputError("frozen edge outside the model");
        }
        if (top_block_[e.top] >= 0 && top_block_[e.top] == bottom_block_[e.bottom]) {
            throw InputError("frozen edge inside an interior block");
        }
    }
}

BicmModel BicmModel::from_multipliers(std::vector<double> top, std::vector<double> bottom) {
    std::vector<int> top_block(top.size(), 0);
    std::vector<int> bottom_block(bottom.size(), 0);
    return BicmModel(std::move(top), std::move(bottom), std::move(top_block), std::move(bottom_block), {});
}

double BicmModel::unchecked_probability(NodeIndex top, NodeIndex bottom) const {
    const int block = top_block_[top];
    if (block >= 0 && block == bottom_block_[bottom]) {
        const double xy = top_[top] * bottom_[bottom];
        return xy / (1.0 + xy);
    }
    return std::binary_search(frozen_ones_.begin(), frozen_ones_.end(), Edge{top, bottom}) ? 1.0 : 0.0;
}

double BicmModel::probability(NodeIndex top, NodeIndex bottom) const {
    if (top >= top_.size() || bottom >= bottom_.size()) {
        throw std::out_of_range("node index outside the model");
    }
    return unchecked_probability(top, bottom);
}

bool BicmModel::is_frozen(NodeIndex top, NodeIndex bottom) const {
    if (top >= top_.size() || bottom >= bottom_.size()) {
        throw std::out_of_range("node index outside the model");
    }
    return !(top_block_[top] >= 0 && top_block_[top] == bottom_block_[bottom]);
}

std::vector<double> BicmModel::expected_top_degrees() const {
    std::vector<double> out(top_.size(), 0.0);
    for (NodeIndex i = 0; i < top_.size(); ++i) {
        for (NodeIndex a = 0; a < bottom_.size(); ++a) out[i] += unchecked_probability(i, a);
    }
    return out;
}

std::vector<double> BicmModel::expected_bottom_degrees() const {
    std::vector<double> out(bottom_.size(), 0.0);
    for (NodeIndex i = 0; i < top_.size(); ++i) {
        for (NodeIndex a = 0; a < bottom_.size(); ++a) out[a] += unchecked_probability(i, a);
    }
    return out;
}

double degree_residual(const BicmModel& model, const DegreeSequence& degrees) {
    if (degrees.top.size() != model.top_count() || degrees.bottom.size() != model.bottom_count()) {
        throw InputError("degree sequence does not match the model dimensions");
    }
    double worst = 0.0;
    const auto top = model.expected_top_degrees();
    for (std::size_t i = 0; i < top.size(); ++i) {
        const double k = static_cast<double>(degrees.top[i]);
        worst = std::max(worst, std::abs(top[i] - k) / std::max(1.0, k));
    }
    const auto bottom = model.expected_bottom_degrees();
    for (std::size_t a = 0; a < bottom.size(); ++a) {
        const double d = static_cast<double>(degrees.bottom[a]);
        worst = std::max(worst, std::abs(bottom[a] - d) / std::max(1.0, d));
    }
    return worst;
}

BicmModel fit_bicm(const DegreeSequence& degrees, const BicmOptions& options) {
    if (!(options.tol > 0.0)) throw InputError("tolerance must be positive");
    if (options.max_iter <= 0) throw InputError("max_iter must be positive");
    degrees.validate();
    const auto n_top = static_cast<std::int64_t>(degrees.top.size());
    const auto n_bottom = static_cast<std::int64_t>(degrees.bottom.size());
    for (std::size_t i = 0; i < degrees.top.size(); ++i) {
        if (degrees.top[i] > n_bottom) {
            throw InputError("top node " + std::to_string(i) + " has degree " +
                             std::to_string(degrees.top[i]) + " but the bottom layer has only " +
                             std::to_string(n_bottom) + " nodes");
        }
    }
    for (std::size_t a = 0; a < degrees.bottom.size(); ++a) {
        if (degrees.bottom[a] > n_top) {
            throw InputError("bottom node " + std::to_string(a) + " has degree " +
                             std::to_string(degrees.bottom[a]) + " but the top layer has only " +
                             std::to_string(n_top) + " nodes");
        }
    }

    FitState state;
    state.top_mult.assign(degrees.top.size(), 0.0);
    state.bottom_mult.assign(degrees.bottom.size(), 0.0);
    state.top_block.assign(degrees.top.size(), -1);
    state.bottom_block.assign(degrees.bottom.size(), -1);
    state.info.tol = options.tol;
    state.info.grouped = options.group_degrees;

    Subproblem root;
    for (std::size_t i = 0; i < degrees.top.size(); ++i) {
        root.tops.push_back(static_cast<NodeIndex>(i));
        root.top_residual.push_back(degrees.top[i]);
    }
    for (std::size_t a = 0; a < degrees.bottom.size(); ++a) {
        root.bottoms.push_back(static_cast<NodeIndex>(a));
        root.bottom_residual.push_back(degrees.bottom[a]);
    }

    std::size_t budget = static_cast<std::size_t>(options.max_iter);
    std::vector<Subproblem> pending;
    pending.push_back(std::move(root));
    int blocks = 0;
    while (!pending.empty()) {
        Subproblem sub = std::move(pending.back());
        pending.pop_back();
        peel(sub, state);
        if (sub.tops.empty() || sub.bottoms.empty()) continue;
        if (split_on_tight_cut(sub, state, pending)) continue;
        solve_interior(sub, blocks++, options, state, budget);
    }
    state.info.blocks = static_cast<std::size_t>(blocks);

    BicmModel model(std::move(state.top_mult), std::move(state.bottom_mult), std::move(state.top_block),
                    std::move(state.bottom_block), std::move(state.frozen_ones), 0.0, std::move(state.info));
    const double residual = degree_residual(model, degrees);
    return BicmModel(model.top_multipliers(), model.bottom_multipliers(), model.top_blocks(),
                     model.bottom_blocks(), model.frozen_ones(), residual, model.solver());
}

BipartiteGraph sample_graph(const BicmModel& model, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> top_ids;
    std::vector<std::string> bottom_ids;
    for (std::size_t i = 0; i < model.top_count(); ++i) top_ids.push_back("t" + pad_index(i, model.top_count()));
    for (std::size_t a = 0; a < model.bottom_count(); ++a) {
        bottom_ids.push_back("b" + pad_index(a, model.bottom_count()));
    }
    std::vector<Edge> edges;
    for (NodeIndex i = 0; i < model.top_count(); ++i) {
        for (NodeIndex a = 0; a < model.bottom_count(); ++a) {
            const double p = model.probability(i, a);
            // Always consume one draw per pair so streams stay aligned across models.
            const double u = rng.uniform();
            if (u < p) edges.push_back({i, a});
        }
    }
    return BipartiteGraph(std::move(top_ids), std::move(bottom_ids), std::move(edges));
}

double log_likelihood(const BicmModel& model, const BipartiteGraph& graph) {
    if (graph.top_count() != model.top_count() || graph.bottom_count() != model.bottom_count()) {
        throw InputError("graph dimensions do not match the model");
    }
    double total = 0.0;
    std::vector<char> linked(model.bottom_count(), 0);
    for (NodeIndex i = 0; i < model.top_count(); ++i) {
        for (auto a : graph.top_neighbors(i)) linked[a] = 1;
        for (NodeIndex a = 0; a < model.bottom_count(); ++a) {
            const bool edge = linked[a] != 0;
            if (model.is_frozen(i, a)) {
                const bool one = model.probability(i, a) == 1.0;
                if (edge != one) return -kInf;
                continue;
            }
            const double xy = model.top_multipliers()[i] * model.bottom_multipliers()[a];
            if (xy == 0.0) {
                if (edge) return -kInf;
                continue;
            }
            // ln p = -ln(1 + 1/xy), ln(1 - p) = -ln(1 + xy)
            total -= edge ? std::log1p(1.0 / xy) : std::log1p(xy);
        }
        for (auto a : graph.top_neighbors(i)) linked[a] = 0;
    }
    return total;
}

}  // namespace debatenet
