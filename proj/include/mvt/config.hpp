#pragma once

#include <string>
#include <vector>

#include "mvt/simulator.hpp"

namespace mvt {

struct OutputOptions {
    std::string directory = "out";
    std::string experiment_id = "experiment";
    bool emit_steps = true;
    int emit_every = 1;  // thinning of per-step rows
    bool emit_log = false;
    bool emit_summary = true;
    // Expected-reward table of each repetition's environment (histogram data).
    bool emit_rewards = false;
};

// Grid for the hillclimb-study command.
struct StudyOptions {
    std::vector<int> step_budgets = {1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 18};
    std::vector<int> restart_counts = {1};
    int trials = 1000;
};

// The experiment document: JSON with sections template / environment / run /
// output (and an optional study section). Unknown keys are rejected; every
// domain invariant is validated with a field-path diagnostic before a run
// starts.
//
//   {
//     "template":    { "widgets": [8, 8, 8], "context": [4] },
//     "environment": { "alpha1": 1.0, "alpha2": 2.0, "alphac": 0.0, "seed": 7 },
//     "run":         { "T": 250000, "batch_period": 1000, "repetitions": 15,
//                      "algorithms": ["mvt1", "mvt2", "ndmab"],
//                      "argmax": "hillclimb", "restarts": 5, "max_steps": 18,
//                      "window": 2500 },
//     "output":      { "directory": "out", "emit_steps": true }
//   }
//
// "argmax" is either one mode for all algorithms or a per-algorithm object
// like {"mvt2": "hillclimb", "ndmab": "exhaustive"}. Algorithms may include
// "random", a uniform no-learning baseline. Defaults: hillclimb for mvt
// families, exhaustive for ndmab.
struct ExperimentFile {
    SimConfig sim;
    OutputOptions output;
    StudyOptions study;

    static ExperimentFile load(const std::string& path);
    static ExperimentFile parse(const std::string& text, const std::string& origin);
};

}  // namespace mvt
