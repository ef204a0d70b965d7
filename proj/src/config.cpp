#include "mvt/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mvt/errors.hpp"

namespace mvt {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(message, path);
}

void reject_unknown_keys(const json& node, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) fail(path + "." + key, "unknown key");
    }
}

const json* find(const json& node, const char* key) {
    const auto it = node.find(key);
    return it == node.end() ? nullptr : &*it;
}

double require_number(const json& node, const std::string& path) {
    if (!node.is_number()) fail(path, "expected a number");
    return node.get<double>();
}

std::int64_t require_integer(const json& node, const std::string& path) {
    if (!node.is_number_integer()) fail(path, "expected an integer");
    return node.get<std::int64_t>();
}

bool require_bool(const json& node, const std::string& path) {
    if (!node.is_boolean()) fail(path, "expected a boolean");
    return node.get<bool>();
}

std::string require_string(const json& node, const std::string& path) {
    if (!node.is_string()) fail(path, "expected a string");
    return node.get<std::string>();
}

std::vector<int> require_int_array(const json& node, const std::string& path,
                                   int min_value) {
    if (!node.is_array()) fail(path, "expected an array of integers");
    std::vector<int> values;
    values.reserve(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string slot = path + "[" + std::to_string(i) + "]";
        const std::int64_t v = require_integer(node[i], slot);
        if (v < min_value) {
            fail(slot, "must be >= " + std::to_string(min_value));
        }
        values.push_back(static_cast<int>(v));
    }
    return values;
}

ArgmaxMode default_argmax(const AlgorithmConfig& algorithm) {
    if (!algorithm.uniform_random && algorithm.kind.family == ModelFamily::NdMab) {
        return ArgmaxMode::Exhaustive;
    }
    return ArgmaxMode::HillClimb;
}

void parse_run(const json& node, ExperimentFile& file) {
    reject_unknown_keys(node, "run",
                        {"T", "batch_period", "repetitions", "algorithms", "argmax",
                         "restarts", "max_steps", "window"});
    SimConfig& sim = file.sim;
    if (const json* t = find(node, "T")) {
        sim.horizon = require_integer(*t, "run.T");
        if (sim.horizon < 0) fail("run.T", "must be >= 0");
    }
    if (const json* v = find(node, "batch_period")) {
        sim.batch_period = static_cast<int>(require_integer(*v, "run.batch_period"));
        if (sim.batch_period < 1) fail("run.batch_period", "must be >= 1");
    }
    if (const json* v = find(node, "repetitions")) {
        sim.repetitions = static_cast<int>(require_integer(*v, "run.repetitions"));
        if (sim.repetitions < 1) fail("run.repetitions", "must be >= 1");
    }
    if (const json* v = find(node, "window")) {
        sim.window = static_cast<int>(require_integer(*v, "run.window"));
        if (sim.window < 1) fail("run.window", "must be >= 1");
    }

    HillClimbConfig hc;
    if (const json* v = find(node, "restarts")) {
        hc.restarts = static_cast<int>(require_integer(*v, "run.restarts"));
        if (hc.restarts < 1) fail("run.restarts", "must be >= 1");
    }
    if (const json* v = find(node, "max_steps")) {
        hc.max_steps = static_cast<int>(require_integer(*v, "run.max_steps"));
        if (hc.max_steps < 1) fail("run.max_steps", "must be >= 1");
    }

    const json* algorithms = find(node, "algorithms");
    if (!algorithms) fail("run.algorithms", "required");
    if (!algorithms->is_array() || algorithms->empty()) {
        fail("run.algorithms", "expected a non-empty array of algorithm names");
    }
    for (std::size_t i = 0; i < algorithms->size(); ++i) {
        const std::string slot = "run.algorithms[" + std::to_string(i) + "]";
        const std::string name = require_string((*algorithms)[i], slot);
        AlgorithmConfig algorithm;
        algorithm.hill_climb = hc;
        if (name == "random") {
            algorithm.uniform_random = true;
        } else if (auto kind = parse_model_kind(name)) {
            algorithm.kind = *kind;
        } else {
            fail(slot, "unknown algorithm '" + name + "'");
        }
        algorithm.argmax = default_argmax(algorithm);
        sim.algorithms.push_back(algorithm);
    }

    if (const json* v = find(node, "argmax")) {
        if (v->is_string()) {
            const auto mode = parse_argmax_mode(v->get<std::string>());
            if (!mode) fail("run.argmax", "expected 'exhaustive' or 'hillclimb'");
            for (AlgorithmConfig& algorithm : sim.algorithms) algorithm.argmax = *mode;
        } else if (v->is_object()) {
            for (const auto& [key, value] : v->items()) {
                const std::string slot = "run.argmax." + key;
                const auto mode = parse_argmax_mode(require_string(value, slot));
                if (!mode) fail(slot, "expected 'exhaustive' or 'hillclimb'");
                bool matched = false;
                for (AlgorithmConfig& algorithm : sim.algorithms) {
                    if (algorithm.label() == key) {
                        algorithm.argmax = *mode;
                        matched = true;
                    }
                }
                if (!matched) fail(slot, "no such algorithm in run.algorithms");
            }
        } else {
            fail("run.argmax", "expected a string or an object");
        }
    }
}

void parse_study(const json& node, StudyOptions& study) {
    reject_unknown_keys(node, "study", {"k_values", "s_values", "trials"});
    if (const json* v = find(node, "k_values")) {
        study.step_budgets = require_int_array(*v, "study.k_values", 1);
        if (study.step_budgets.empty()) fail("study.k_values", "must be non-empty");
    }
    if (const json* v = find(node, "s_values")) {
        study.restart_counts = require_int_array(*v, "study.s_values", 1);
        if (study.restart_counts.empty()) fail("study.s_values", "must be non-empty");
    }
    if (const json* v = find(node, "trials")) {
        study.trials = static_cast<int>(require_integer(*v, "study.trials"));
        if (study.trials < 1) fail("study.trials", "must be >= 1");
    }
}

void parse_output(const json& node, OutputOptions& output) {
    reject_unknown_keys(node, "output",
                        {"directory", "experiment_id", "emit_steps", "emit_every",
                         "emit_log", "emit_summary", "emit_rewards"});
    if (const json* v = find(node, "directory")) {
        output.directory = require_string(*v, "output.directory");
    }
    if (const json* v = find(node, "experiment_id")) {
        output.experiment_id = require_string(*v, "output.experiment_id");
    }
    if (const json* v = find(node, "emit_steps")) {
        output.emit_steps = require_bool(*v, "output.emit_steps");
    }
    if (const json* v = find(node, "emit_every")) {
        output.emit_every = static_cast<int>(require_integer(*v, "output.emit_every"));
        if (output.emit_every < 1) fail("output.emit_every", "must be >= 1");
    }
    if (const json* v = find(node, "emit_log")) {
        output.emit_log = require_bool(*v, "output.emit_log");
    }
    if (const json* v = find(node, "emit_summary")) {
        output.emit_summary = require_bool(*v, "output.emit_summary");
    }
    if (const json* v = find(node, "emit_rewards")) {
        output.emit_rewards = require_bool(*v, "output.emit_rewards");
    }
}

}  // namespace

ExperimentFile ExperimentFile::parse(const std::string& text,
                                     const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Map the byte offset to a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') ++line;
        }
        throw ValidationError("invalid JSON near line " + std::to_string(line) + ": " +
                                  e.what(),
                              origin);
    }
    if (!doc.is_object()) throw ValidationError("expected a JSON object", origin);
    reject_unknown_keys(doc, origin, {"template", "environment", "run", "output", "study"});

    ExperimentFile file;

    const json* tmpl = find(doc, "template");
    if (!tmpl) fail("template", "required");
    reject_unknown_keys(*tmpl, "template", {"widgets", "context"});
    const json* widgets = find(*tmpl, "widgets");
    if (!widgets) fail("template.widgets", "required");
    file.sim.spec.variations = require_int_array(*widgets, "template.widgets", 1);
    if (const json* context = find(*tmpl, "context")) {
        file.sim.spec.context_cardinalities =
            require_int_array(*context, "template.context", 1);
    }

    if (const json* env = find(doc, "environment")) {
        reject_unknown_keys(*env, "environment", {"alpha1", "alpha2", "alphac", "seed"});
        if (const json* v = find(*env, "alpha1")) {
            file.sim.alpha1 = require_number(*v, "environment.alpha1");
            if (file.sim.alpha1 < 0) fail("environment.alpha1", "must be >= 0");
        }
        if (const json* v = find(*env, "alpha2")) {
            file.sim.alpha2 = require_number(*v, "environment.alpha2");
            if (file.sim.alpha2 < 0) fail("environment.alpha2", "must be >= 0");
        }
        if (const json* v = find(*env, "alphac")) {
            file.sim.alphac = require_number(*v, "environment.alphac");
            if (file.sim.alphac < 0) fail("environment.alphac", "must be >= 0");
        }
        if (const json* v = find(*env, "seed")) {
            file.sim.seed = static_cast<std::uint64_t>(
                require_integer(*v, "environment.seed"));
        }
    }

    const json* run = find(doc, "run");
    if (!run) fail("run", "required");
    parse_run(*run, file);

    if (const json* output = find(doc, "output")) parse_output(*output, file.output);
    if (const json* study = find(doc, "study")) parse_study(*study, file.study);

    // Domain invariants last; these raise with field paths too.
    try {
        file.sim.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()), origin);
    }
    return file;
}

ExperimentFile ExperimentFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SnapshotError(SnapshotError::Kind::Io, "cannot open config " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

}  // namespace mvt
