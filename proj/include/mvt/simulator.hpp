#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mvt/policy.hpp"
#include "mvt/stats.hpp"

namespace mvt {

// One bandit algorithm entry in an experiment. `uniform_random` plays layouts
// uniformly with no learning (baseline and log generator for offline fits).
struct AlgorithmConfig {
    ModelKind kind = ModelKind::mvt2();
    ArgmaxMode argmax = ArgmaxMode::HillClimb;
    HillClimbConfig hill_climb;
    bool uniform_random = false;

    std::string label() const {
        return uniform_random ? "random" : to_string(kind);
    }
};

struct SimConfig {
    TemplateSpec spec;
    double alpha1 = 1.0;
    double alpha2 = 0.0;
    double alphac = 0.0;
    std::int64_t horizon = 250000;
    int batch_period = 1000;
    int repetitions = 15;
    std::uint64_t seed = 0;
    std::vector<AlgorithmConfig> algorithms;
    // Moving window for local regret and the final-window summary metric.
    int window = 2500;

    void validate() const;
};

// Hidden reward environment: i.i.d. N(0,1) weights over the pairwise
// (+context when alphac > 0) feature space, scaled by the alpha mix and
// normalized by beta so the weight-draw variance of the score is 1.
class SimulationTruth {
public:
    SimulationTruth(const SimConfig& config, Rng& rng);
    // From explicit weights (must match the pairwise/contextual shape the
    // alpha mix implies); used to pin environments in tests.
    SimulationTruth(const SimConfig& config, std::vector<double> weights);

    const TemplateSpec& spec() const { return spec_; }
    ModelKind kind() const { return kind_; }
    double beta() const { return beta_; }
    std::span<const double> weights() const { return weights_; }
    // alpha_group * w / beta, indexed by the truth kind's feature scheme.
    std::span<const double> scaled_weights() const { return scaled_weights_; }

    // Phi of the scaled score; success probability of the layout.
    double expected_reward(const Layout& layout, const Context& context) const;
    double expected_reward_by_id(std::uint32_t layout_id, std::uint32_t context_id) const {
        return reward_table_[table_slot(layout_id, context_id)];
    }

    // Best achievable expected reward for the context (exhaustive oracle).
    double optimal_reward(const Context& context) const;
    double optimal_reward_by_id(std::uint32_t context_id) const {
        return optimal_reward_[context_id];
    }
    std::uint32_t optimal_layout_id(std::uint32_t context_id) const {
        return optimal_layout_[context_id];
    }

    // Bernoulli draw mapped to {+1, -1}.
    int sample_reward(const Layout& layout, const Context& context, Rng& rng) const;
    int sample_reward_by_id(std::uint32_t layout_id, std::uint32_t context_id,
                            Rng& rng) const;

private:
    FeatureIndexer init_shape(const SimConfig& config);
    void init_tables(const SimConfig& config, const FeatureIndexer& indexer);

    std::size_t table_slot(std::uint32_t layout_id, std::uint32_t context_id) const {
        return static_cast<std::size_t>(context_id) * layout_count_ + layout_id;
    }

    TemplateSpec spec_;
    ModelKind kind_;
    double beta_ = 1.0;
    std::vector<double> weights_;         // raw N(0,1) draws
    std::vector<double> scaled_weights_;  // alpha_group * w / beta
    std::size_t layout_count_ = 0;
    std::vector<double> reward_table_;    // [context][layout]
    std::vector<double> optimal_reward_;  // per context
    std::vector<std::uint32_t> optimal_layout_;
};

// Analytic beta for the unit-variance normalization:
// sqrt(1 + a1^2 D + a2^2 C(D,2) + ac^2 L + ac^2 D L).
double truth_beta(const TemplateSpec& spec, double alpha1, double alpha2,
                  double alphac);

inline SimulationTruth make_truth(const SimConfig& config, Rng& rng) {
    return SimulationTruth(config, rng);
}

// Per-step records of one bandit run.
struct History {
    std::vector<std::uint32_t> layout_ids;
    std::vector<std::uint32_t> context_ids;
    std::vector<std::int8_t> rewards;  // +1 / -1
    std::vector<double> expected_chosen;
    std::vector<double> expected_optimal;

    std::size_t size() const { return rewards.size(); }
};

// Empirical regret on the probability scale: rewards in {+1,-1} are mapped to
// {1,0} and differenced against the optimal arm's expected success rate.
double regret(const History& history);
// Inclusive window [t0, t1], 1-based, normalizer 1/(1 + t1 - t0).
double local_regret(const History& history, std::size_t t0, std::size_t t1);
// Local regret over the trailing window (the summary metric).
double final_local_regret(const History& history, int window);

// One bandit run: per step draw a uniform context, select with the algorithm's
// policy against the last-trained posterior, observe a truth reward, and fold
// the accumulated batch into the posterior every batch_period steps.
//
// env_seed drives contexts and rewards (shared across algorithms within a
// repetition so they face identical environments); policy_seed drives
// sampling and hill-climb randomness.
History run_loop(const SimConfig& config, const SimulationTruth& truth,
                 const AlgorithmConfig& algorithm, std::uint64_t env_seed,
                 std::uint64_t policy_seed);

// A model trained by one full run: the posterior snapshot(s) after the final
// batch fold (one posterior, or one per widget for the D-MABs ensemble).
struct TrainedModel {
    ModelKind kind;
    std::vector<GaussianPosterior> posteriors;
    History history;
};

// Same loop as run_loop, but also folds the trailing partial batch and
// returns the trained posterior(s) alongside the history.
TrainedModel train_model(const SimConfig& config, const SimulationTruth& truth,
                         const AlgorithmConfig& algorithm, std::uint64_t env_seed,
                         std::uint64_t policy_seed);

struct AlgorithmSummary {
    std::string label;
    std::vector<double> final_local_regret;  // per repetition
    std::vector<double> overall_regret;      // per repetition
    MeanStderr final_local;
    MeanStderr overall;
};

struct ExperimentResult {
    std::vector<AlgorithmSummary> algorithms;
};

// Invoked once per finished run, in (algorithm, repetition) order.
using RunSink =
    std::function<void(std::size_t algorithm_index, int repetition, const History&)>;

// Runs repetitions * algorithms independent loops: one fresh truth per
// repetition shared by all algorithms. Deterministic for a given config seed
// regardless of `jobs`.
ExperimentResult run_experiment(const SimConfig& config, int jobs = 1,
                                const RunSink& sink = {});

}  // namespace mvt
