#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "debatenet/graph.hpp"

namespace debatenet {

struct BicmOptions {
    double tol = 1e-8;  // max relative degree residual
    int max_iter = 10000;
    // Solve one unknown per distinct degree value instead of one per node.
    bool group_degrees = true;
};

struct SolverInfo {
    std::size_t iterations = 0;
    std::size_t newton_steps = 0;
    double tol = 0.0;
    bool grouped = true;
    std::size_t blocks = 0;    // independent interior subproblems
    std::size_t unknowns = 0;  // multipliers actually solved for
    std::vector<double> trajectory;
};

// Fitted Bipartite Configuration Model.
//
// Each node belongs to an interior block (>= 0) or to no block (-1). For a pair in the
// same block the edge probability is x*y / (1 + x*y). Every other pair is frozen: it is 1
// when listed in frozen_ones() and 0 otherwise. Frozen pairs come from nodes whose
// degree forces their row or column (empty, full), and from degree sequences that sit on
// the boundary of the feasible region, where whole blocks are forced.
class BicmModel {
public:
    BicmModel() = default;
    BicmModel(std::vector<double> top_multipliers, std::vector<double> bottom_multipliers,
              std::vector<int> top_block, std::vector<int> bottom_block,
              std::vector<Edge> frozen_ones, double fit_residual = 0.0, SolverInfo solver = {});

    /// Model with every node in one block, so all probabilities follow the formula.
    static BicmModel from_multipliers(std::vector<double> top, std::vector<double> bottom);

    std::size_t top_count() const noexcept { return top_.size(); }
    std::size_t bottom_count() const noexcept { return bottom_.size(); }

    const std::vector<double>& top_multipliers() const noexcept { return top_; }
    const std::vector<double>& bottom_multipliers() const noexcept { return bottom_; }
    const std::vector<int>& top_blocks() const noexcept { return top_block_; }
    const std::vector<int>& bottom_blocks() const noexcept { return bottom_block_; }
    const std::vector<Edge>& frozen_ones() const noexcept { return frozen_ones_; }
    double fit_residual() const noexcept { return fit_residual_; }
    const SolverInfo& solver() const noexcept { return solver_; }

    /// Throws std::out_of_range on invalid indices.
    double probability(NodeIndex top, NodeIndex bottom) const;
    bool is_frozen(NodeIndex top, NodeIndex bottom) const;

    std::vector<double> expected_top_degrees() const;
    std::vector<double> expected_bottom_degrees() const;

private:
    double unchecked_probability(NodeIndex top, NodeIndex bottom) const;

    std::vector<double> top_;
    std::vector<double> bottom_;
    std::vector<int> top_block_;
    std::vector<int> bottom_block_;
    std::vector<Edge> frozen_ones_;  // sorted
    double fit_residual_ = 0.0;
    SolverInfo solver_;
};

/// Max over nodes of |expected - observed| / max(1, observed), both layers.
double degree_residual(const BicmModel& model, const DegreeSequence& degrees);

/// Fits the model to a degree sequence.
/// Throws InputError for invalid options or a degree sequence no bipartite graph can
/// realize, and ConvergenceError when max_iter is exhausted.
BicmModel fit_bicm(const DegreeSequence& degrees, const BicmOptions& options = {});

inline double edge_probability(const BicmModel& model, NodeIndex top, NodeIndex bottom) {
    return model.probability(top, bottom);
}

/// Draws every pair independently. Node ids are zero-padded indices.
BipartiteGraph sample_graph(const BicmModel& model, std::uint64_t seed);

/// Log-probability of the graph under the model; -infinity when the graph contradicts
/// a frozen pair. Throws InputError on a layer size mismatch.
double log_likelihood(const BicmModel& model, const BipartiteGraph& graph);

}  // namespace debatenet
