#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvt/blip.hpp"
#include "mvt/features.hpp"
#include "mvt/rng.hpp"

namespace mvt {

enum class ArgmaxMode : std::uint8_t { Exhaustive, HillClimb };

std::string to_string(ArgmaxMode mode);
std::optional<ArgmaxMode> parse_argmax_mode(const std::string& name);

struct HillClimbConfig {
    int restarts = 5;
    // Budget of single-widget optimization steps per restart; 0 means the
    // default 6 * D.
    int max_steps = 0;
    bool early_stop = true;

    int resolved_max_steps(int widget_count) const {
        return max_steps > 0 ? max_steps : 6 * widget_count;
    }
};

struct SelectionTrace {
    Layout layout;
    double score = 0.0;
    // Distinct layout scorings performed: one initial scoring per restart plus
    // one per non-incumbent candidate. The incumbent's score is reused, not
    // re-evaluated; under the re-evaluation convention add one per widget
    // step (steps_per_restart totals).
    std::uint64_t evaluations = 0;
    // Widget steps taken by each restart, including the final full sweep that
    // confirms a local optimum.
    std::vector<int> steps_per_restart;
    std::optional<bool> reached_global;

    int total_steps() const {
        int total = 0;
        for (int s : steps_per_restart) total += s;
        return total;
    }

    // CSV row: layout, score, evaluations, steps, reached_global.
    std::string csv_row() const;
    static std::string csv_header();
};

// Scores layouts under one sampled (or fixed) weight vector. Supports O(D+L)
// incremental rescoring of single-widget changes.
class LayoutScorer {
public:
    LayoutScorer(const FeatureIndexer& indexer, std::span<const double> weights,
                 const Context* context);

    double full_score(const Layout& layout) const;

    // Sum of every weight term that involves widget `widget` when it holds
    // `content`, with all other widgets fixed as in `layout`. Replacing the
    // incumbent contribution with a candidate's reproduces the full score:
    // score(layout with widget=j) = full - contribution(incumbent) +
    // contribution(j). For NdMab the "contribution" is the whole score.
    double widget_contribution(const Layout& layout, int widget, int content) const;

private:
    const FeatureIndexer* indexer_;
    std::span<const double> weights_;
    const Context* context_;
};

// Exact argmax over all layouts; ties resolved to the lexicographically
// smallest layout. Throws CapExceededError beyond `cap` layouts.
Layout exhaustive_argmax(const WeightSample& sample, const FeatureIndexer& indexer,
                         const Context* context = nullptr,
                         std::uint64_t cap = kDefaultEnumerationCap,
                         double* best_score = nullptr);
Layout exhaustive_argmax(const WeightSample& sample, const TemplateSpec& spec,
                         ModelKind kind, const Context* context = nullptr,
                         std::uint64_t cap = kDefaultEnumerationCap,
                         double* best_score = nullptr);

// Greedy single-widget ascent with random restarts. Each sweep visits the
// widgets in a fresh random permutation; a widget step sets the widget to the
// content maximizing the score with the rest fixed, preferring the incumbent
// on ties, then the lowest content id. A restart stops after a full sweep
// changes nothing (when early_stop) or when the step budget runs out. Best
// restart wins; ties go to the earliest restart.
//
// When `global_optimum_score` is supplied, the trace reports whether the
// returned layout matches it (within a tiny score tolerance).
SelectionTrace hill_climb(const WeightSample& sample, const FeatureIndexer& indexer,
                          const Context* context, const HillClimbConfig& config,
                          Rng& rng, const double* global_optimum_score = nullptr);
SelectionTrace hill_climb(const WeightSample& sample, const TemplateSpec& spec,
                          ModelKind kind, const Context* context,
                          const HillClimbConfig& config, Rng& rng,
                          const double* global_optimum_score = nullptr);

// One Thompson step: sample weights from the posterior, then argmax by the
// configured mode.
SelectionTrace thompson_select(const GaussianPosterior& posterior,
                               const FeatureIndexer& indexer, const Context* context,
                               ArgmaxMode mode, const HillClimbConfig& config,
                               Rng& rng);
SelectionTrace thompson_select(const GaussianPosterior& posterior,
                               const TemplateSpec& spec, ModelKind kind,
                               const Context* context, ArgmaxMode mode,
                               const HillClimbConfig& config, Rng& rng);

// Independent per-widget Thompson draws composed into a layout. One posterior
// per widget, each of dimension 1 + N_i.
Layout dmabs_select(std::span<const GaussianPosterior> posteriors,
                    const TemplateSpec& spec, Rng& rng);

}  // namespace mvt
