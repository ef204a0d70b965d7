// Command-line front end: experiment execution, CSV emission, snapshot
// persistence, and realtime layout selection against a saved model.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mvt/analysis.hpp"
#include "mvt/config.hpp"
#include "mvt/csv.hpp"
#include "mvt/errors.hpp"
#include "mvt/snapshot.hpp"

namespace {

using namespace mvt;

constexpr int kExitUsage = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitIo = 3;
constexpr int kExitSnapshotVersion = 4;
constexpr int kExitSnapshotCorrupt = 5;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;   // overrides output.directory
    std::int64_t seed = -1;  // overrides environment.seed when >= 0
    int jobs = 1;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out-dir", flags.out_dir, "override the output directory");
    cmd->add_option("--jobs", flags.jobs, "parallel repetitions")
        ->check(CLI::Range(1, 512));
    cmd->add_option("--format", flags.format, "output format (csv)")
        ->check(CLI::IsMember({"csv"}));
}

ExperimentFile load_experiment(const CommonFlags& flags) {
    ExperimentFile file = ExperimentFile::load(flags.config_path);
    if (flags.seed >= 0) file.sim.seed = static_cast<std::uint64_t>(flags.seed);
    if (!flags.out_dir.empty()) file.output.directory = flags.out_dir;
    return file;
}

std::filesystem::path ensure_out_dir(const ExperimentFile& file) {
    std::filesystem::path dir(file.output.directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw SnapshotError(SnapshotError::Kind::Io,
                            "cannot create output directory " + dir.string());
    }
    return dir;
}

// Streams per-step rows with rolling local/cumulative regret.
class StepsEmitter {
public:
    StepsEmitter(const std::filesystem::path& path, const ExperimentFile& file,
                 std::string experiment_id)
        : writer_(path.string(), "mvt.steps.v1",
                  "experiment_id,algorithm,repetition,t,local_regret,regret"),
          file_(&file),
          experiment_id_(std::move(experiment_id)) {}

    void run(std::size_t algorithm_index, int repetition, const History& history) {
        const std::string label = file_->sim.algorithms[algorithm_index].label();
        const std::size_t window = static_cast<std::size_t>(file_->sim.window);
        const int every = file_->output.emit_every;
        double window_sum = 0.0;
        double cumulative = 0.0;
        for (std::size_t t = 1; t <= history.size(); ++t) {
            const double reward01 = history.rewards[t - 1] > 0 ? 1.0 : 0.0;
            const double step_regret = history.expected_optimal[t - 1] - reward01;
            window_sum += step_regret;
            cumulative += step_regret;
            if (t > window) {
                const double old01 = history.rewards[t - window - 1] > 0 ? 1.0 : 0.0;
                window_sum -= history.expected_optimal[t - window - 1] - old01;
            }
            if (t % static_cast<std::size_t>(every) != 0) continue;
            const double local =
                window_sum / static_cast<double>(std::min(window, t));
            std::ostringstream row;
            row << experiment_id_ << ',' << label << ',' << repetition << ',' << t
                << ',' << format_double(local) << ','
                << format_double(cumulative / static_cast<double>(t));
            writer_.row(row.str());
        }
    }

    void close() { writer_.close(); }

private:
    CsvWriter writer_;
    const ExperimentFile* file_;
    std::string experiment_id_;
};

// Observation log in the documented interchange format.
class LogEmitter {
public:
    LogEmitter(const std::filesystem::path& path, const TemplateSpec& spec)
        : writer_(path.string(), "mvt.log.v1", header(spec)), spec_(&spec) {}

    static std::string header(const TemplateSpec& spec) {
        std::string h = "t";
        for (int i = 1; i <= spec.widget_count(); ++i) {
            h += ",widget_" + std::to_string(i);
        }
        for (int l = 1; l <= spec.context_dims(); ++l) {
            h += ",ctx_" + std::to_string(l);
        }
        return h + ",reward";
    }

    void run(const History& history) {
        for (std::size_t t = 1; t <= history.size(); ++t) {
            const Layout layout = layout_from_flat_id(*spec_, history.layout_ids[t - 1]);
            const Context ctx = context_from_flat_id(*spec_, history.context_ids[t - 1]);
            std::ostringstream row;
            row << t;
            for (int v : layout) row << ',' << v;
            for (int v : ctx) row << ',' << v;
            row << ',' << (history.rewards[t - 1] > 0 ? 1 : 0);
            writer_.row(row.str());
        }
    }

    void close() { writer_.close(); }

private:
    CsvWriter writer_;
    const TemplateSpec* spec_;
};

void print_regret_table(const ExperimentResult& result, const std::string& title) {
    std::cout << title << "\n";
    std::cout << "algorithm        final_local_regret     overall_regret\n";
    for (const AlgorithmSummary& s : result.algorithms) {
        std::ostringstream line;
        line.setf(std::ios::fixed);
        line.precision(5);
        line << s.label;
        for (std::size_t pad = s.label.size(); pad < 17; ++pad) line << ' ';
        line << s.final_local.mean << " +/- " << s.final_local.stderr_ << "   "
             << s.overall.mean << " +/- " << s.overall.stderr_;
        std::cout << line.str() << "\n";
    }
}

void append_summary_rows(CsvWriter& writer, const ExperimentResult& result,
                         const std::string& swept_value) {
    for (const AlgorithmSummary& s : result.algorithms) {
        std::ostringstream row;
        row << s.label << ',' << swept_value << ',' << format_double(s.final_local.mean)
            << ',' << format_double(s.final_local.stderr_);
        writer.row(row.str());
    }
}

int cmd_simulate(const CommonFlags& flags) {
    const ExperimentFile file = load_experiment(flags);
    const auto dir = ensure_out_dir(file);

    std::optional<StepsEmitter> steps;
    if (file.output.emit_steps) {
        steps.emplace(dir / "steps.csv", file, file.output.experiment_id);
    }

    const RunSink sink = [&](std::size_t a, int rep, const History& history) {
        if (steps) steps->run(a, rep, history);
        if (file.output.emit_log) {
            const std::string name = "log_" + file.sim.algorithms[a].label() + "_rep" +
                                     std::to_string(rep) + ".csv";
            LogEmitter log(dir / name, file.sim.spec);
            log.run(history);
            log.close();
        }
    };

    const ExperimentResult result = run_experiment(file.sim, flags.jobs, sink);
    if (steps) steps->close();
    if (file.output.emit_rewards) {
        // Expected-reward table per repetition environment; the truth streams
        // are derived from the config seed, so this reconstructs exactly the
        // environments the runs used.
        for (int rep = 0; rep < file.sim.repetitions; ++rep) {
            Rng truth_rng(derive_seed(file.sim.seed, "truth",
                                      static_cast<std::uint64_t>(rep)));
            const SimulationTruth truth(file.sim, truth_rng);
            CsvWriter rewards(
                (dir / ("rewards_rep" + std::to_string(rep) + ".csv")).string(),
                "mvt.rewards.v1", "repetition,context_id,layout,expected_reward");
            const auto contexts =
                static_cast<std::uint32_t>(file.sim.spec.context_count());
            for (std::uint32_t c = 0; c < contexts; ++c) {
                std::uint32_t id = 0;
                for (LayoutEnumerator it(file.sim.spec); !it.done();
                     it.next(), ++id) {
                    std::ostringstream row;
                    row << rep << ',' << c << ',';
                    const Layout& layout = it.layout();
                    for (std::size_t i = 0; i < layout.size(); ++i) {
                        if (i) row << '-';
                        row << layout[i];
                    }
                    row << ',' << format_double(truth.expected_reward_by_id(id, c));
                    rewards.row(row.str());
                }
            }
            rewards.close();
        }
    }
    if (file.output.emit_summary) {
        CsvWriter summary((dir / "summary.csv").string(), "mvt.summary.v1",
                          "algorithm,swept_value,mean_regret,stderr");
        append_summary_rows(summary, result, "");
        summary.close();
    }
    print_regret_table(result, "final local regret (window " +
                                   std::to_string(file.sim.window) + "):");
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& parameter,
              const std::vector<double>& values) {
    if (values.empty()) {
        std::cerr << "sweep: --values must be non-empty\n";
        return kExitUsage;
    }
    const ExperimentFile file = load_experiment(flags);
    const auto dir = ensure_out_dir(file);

    CsvWriter summary((dir / "summary.csv").string(), "mvt.summary.v1",
                      "algorithm,swept_value,mean_regret,stderr");
    for (double value : values) {
        ExperimentFile point = file;
        if (parameter == "alpha2") {
            point.sim.alpha2 = value;
        } else if (parameter == "alphac") {
            point.sim.alphac = value;
        } else if (parameter == "N") {
            const int n = static_cast<int>(value);
            if (n < 1 || static_cast<double>(n) != value) {
                throw ValidationError("N sweep values must be positive integers");
            }
            for (int& ni : point.sim.spec.variations) ni = n;
        } else {
            throw ValidationError("sweep parameter must be alpha2, alphac, or N");
        }
        point.sim.validate();

        std::optional<StepsEmitter> steps;
        if (point.output.emit_steps) {
            const std::string name = "steps_" + parameter + "_" + format_double(value) +
                                     ".csv";
            steps.emplace(dir / name, point,
                          point.output.experiment_id + "/" + parameter + "=" +
                              format_double(value));
        }
        const RunSink sink = [&](std::size_t a, int rep, const History& history) {
            if (steps) steps->run(a, rep, history);
        };
        const ExperimentResult result = run_experiment(point.sim, flags.jobs, sink);
        if (steps) steps->close();
        append_summary_rows(summary, result, format_double(value));
        print_regret_table(result, parameter + " = " + format_double(value) + ":");
    }
    summary.close();
    return 0;
}

int cmd_hillclimb_study(const CommonFlags& flags) {
    const ExperimentFile file = load_experiment(flags);
    const auto dir = ensure_out_dir(file);
    const AlgorithmConfig& algorithm = file.sim.algorithms.front();
    if (algorithm.uniform_random || algorithm.kind.is_dmabs_ensemble()) {
        throw ValidationError("hillclimb-study requires a probit model algorithm");
    }

    Rng truth_rng(derive_seed(file.sim.seed, "truth", 0));
    const SimulationTruth truth(file.sim, truth_rng);
    const TrainedModel model =
        train_model(file.sim, truth, algorithm, derive_seed(file.sim.seed, "env", 0),
                    derive_seed(file.sim.seed, "policy", 0, 0));

    HillClimbStudyConfig study;
    study.step_budgets = file.study.step_budgets;
    study.restart_counts = file.study.restart_counts;
    study.trials = file.study.trials;

    Rng study_rng(derive_seed(file.sim.seed, "study"));
    const auto rows = hill_climb_study(model.posteriors.front(), model.kind, truth,
                                       study, study_rng);

    CsvWriter out((dir / "study.csv").string(), "mvt.study.v1",
                  "K,S,trials,mean_steps,sd_steps,p_global,regret_random,"
                  "regret_converged");
    std::cout << "K,S,p_global,mean_steps,regret_random,regret_converged\n";
    for (const HillClimbStudyRow& row : rows) {
        std::ostringstream line;
        line << row.max_steps << ',' << row.restarts << ',' << row.trials << ','
             << format_double(row.mean_steps) << ',' << format_double(row.sd_steps)
             << ',' << format_double(row.p_global) << ','
             << format_double(row.regret_random) << ','
             << format_double(row.regret_converged);
        out.row(line.str());
        std::cout << row.max_steps << ',' << row.restarts << ','
                  << format_double(row.p_global) << ',' << format_double(row.mean_steps)
                  << ',' << format_double(row.regret_random) << ','
                  << format_double(row.regret_converged) << "\n";
    }
    out.close();
    return 0;
}

std::vector<LoggedImpression> read_log(const std::string& path,
                                       const TemplateSpec& spec) {
    std::ifstream in(path);
    if (!in) throw SnapshotError(SnapshotError::Kind::Io, "cannot open log " + path);
    std::vector<LoggedImpression> rows;
    std::string line;
    std::size_t line_no = 0;
    const int d = spec.widget_count();
    const int l = spec.context_dims();
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // header row: t,widget_1..,ctx_1..,reward
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != 2 + d + l) {
            throw ValidationError("wrong column count",
                                  path + ":" + std::to_string(line_no));
        }
        LoggedImpression row;
        try {
            row.layout.resize(d);
            for (int i = 0; i < d; ++i) row.layout[i] = std::stoi(cells[1 + i]);
            row.context.resize(l);
            for (int i = 0; i < l; ++i) row.context[i] = std::stoi(cells[1 + d + i]);
            const int reward01 = std::stoi(cells[1 + d + l]);
            if (reward01 != 0 && reward01 != 1) {
                throw ValidationError("reward must be 0 or 1");
            }
            row.reward = reward01 == 1 ? 1 : -1;
            validate_layout(spec, row.layout);
            validate_context(spec, row.context);
        } catch (const std::exception& e) {
            throw ValidationError(std::string("bad row: ") + e.what(),
                                  path + ":" + std::to_string(line_no));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_lrt(const CommonFlags& flags, const std::string& data_path,
            const std::string& models, int passes) {
    const ExperimentFile file = load_experiment(flags);
    const auto dir = ensure_out_dir(file);

    const auto comma = models.find(',');
    if (comma == std::string::npos) {
        throw ValidationError("--models expects 'restricted,full'");
    }
    const auto restricted = parse_model_kind(models.substr(0, comma));
    const auto full = parse_model_kind(models.substr(comma + 1));
    if (!restricted || !full) throw ValidationError("unknown model kind in --models");

    const auto data = read_log(data_path, file.sim.spec);
    const LrtResult result =
        lrt_between(*restricted, *full, file.sim.spec, data, passes);

    const std::string comparison =
        to_string(*full) + "_vs_" + to_string(*restricted);
    CsvWriter out((dir / "lrt.csv").string(), "mvt.lrt.v1",
                  "comparison,statistic,df,p_value");
    std::ostringstream row;
    row << comparison << ',' << format_double(result.statistic) << ',' << result.df
        << ',' << format_double(result.p_value);
    out.row(row.str());
    out.close();
    std::cout << "comparison,statistic,df,p_value\n" << row.str() << "\n";
    return 0;
}

int cmd_snapshot_save(const CommonFlags& flags, const std::string& out_path) {
    const ExperimentFile file = load_experiment(flags);
    const AlgorithmConfig& algorithm = file.sim.algorithms.front();
    if (algorithm.uniform_random) {
        throw ValidationError("cannot snapshot the random baseline");
    }
    Rng truth_rng(derive_seed(file.sim.seed, "truth", 0));
    const SimulationTruth truth(file.sim, truth_rng);
    const TrainedModel model =
        train_model(file.sim, truth, algorithm, derive_seed(file.sim.seed, "env", 0),
                    derive_seed(file.sim.seed, "policy", 0, 0));

    save_snapshot({file.sim.spec, model.kind, model.posteriors}, out_path);
    std::cout << "saved " << to_string(model.kind) << " snapshot ("
              << model.posteriors.size() << " model(s)) to " << out_path << "\n";
    return 0;
}

int cmd_snapshot_load(const std::string& in_path) {
    const ModelSnapshot snapshot = load_snapshot(in_path);
    std::cout << "kind: " << to_string(snapshot.kind) << "\n";
    std::cout << "widgets:";
    for (int n : snapshot.spec.variations) std::cout << ' ' << n;
    std::cout << "\ncontext:";
    for (int g : snapshot.spec.context_cardinalities) std::cout << ' ' << g;
    std::cout << "\nmodels: " << snapshot.posteriors.size() << "\n";
    for (const GaussianPosterior& p : snapshot.posteriors) {
        std::cout << "  M=" << p.dimension() << "\n";
    }
    return 0;
}

int cmd_select(const std::string& snapshot_path, const std::string& context_csv,
               std::int64_t seed, const std::string& argmax, int restarts,
               int max_steps, int repeat) {
    const ModelSnapshot snapshot = load_snapshot(snapshot_path);
    snapshot.spec.validate();

    Context context;
    if (!context_csv.empty()) {
        std::stringstream ss(context_csv);
        std::string cell;
        while (std::getline(ss, cell, ',')) context.push_back(std::stoi(cell));
    }
    if (static_cast<int>(context.size()) != snapshot.spec.context_dims()) {
        throw ValidationError("--context must supply one value per context dimension");
    }
    validate_context(snapshot.spec, context);

    const auto mode = parse_argmax_mode(argmax);
    if (!mode) throw ValidationError("--argmax must be exhaustive or hillclimb");
    HillClimbConfig hc;
    hc.restarts = restarts;
    hc.max_steps = max_steps;

    std::vector<double> micros;
    micros.reserve(repeat);
    std::cout << SelectionTrace::csv_header() << "\n";
    for (int call = 0; call < repeat; ++call) {
        Rng rng(derive_seed(static_cast<std::uint64_t>(seed), "select", call));
        const auto start = std::chrono::steady_clock::now();
        SelectionTrace trace;
        if (snapshot.kind.is_dmabs_ensemble()) {
            trace.layout = dmabs_select(snapshot.posteriors, snapshot.spec, rng);
        } else {
            const FeatureIndexer indexer(snapshot.kind, snapshot.spec);
            const Context* ctx = snapshot.kind.uses_context() ? &context : nullptr;
            trace = thompson_select(snapshot.posteriors.front(), indexer, ctx, *mode,
                                    hc, rng);
        }
        const auto stop = std::chrono::steady_clock::now();
        micros.push_back(
            std::chrono::duration<double, std::micro>(stop - start).count());
        if (repeat == 1 || call == repeat - 1) {
            std::cout << trace.csv_row() << "\n";
        }
    }
    if (repeat > 1) {
        std::nth_element(micros.begin(), micros.begin() + micros.size() / 2,
                         micros.end());
        std::cout << "median_select_micros=" << micros[micros.size() / 2] << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate layout bandit toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;
    int exit_code = 0;
    std::function<int()> action;

    auto* simulate = app.add_subcommand("simulate", "run the configured experiment");
    add_common(simulate, flags);
    simulate->callback([&] { action = [&] { return cmd_simulate(flags); }; });

    auto* sweep = app.add_subcommand("sweep", "rerun the experiment over a parameter grid");
    std::string sweep_param;
    std::vector<double> sweep_values;
    add_common(sweep, flags);
    sweep->add_option("--param", sweep_param, "alpha2 | alphac | N")->required();
    sweep->add_option("--values", sweep_values, "grid values")->required()->delimiter(',');
    sweep->callback(
        [&] { action = [&] { return cmd_sweep(flags, sweep_param, sweep_values); }; });

    auto* study = app.add_subcommand("hillclimb-study",
                                     "train a model, then measure hill-climb quality");
    add_common(study, flags);
    study->callback([&] { action = [&] { return cmd_hillclimb_study(flags); }; });

    auto* lrt_cmd = app.add_subcommand("lrt", "likelihood ratio test on an observation log");
    std::string lrt_data, lrt_models;
    int lrt_passes = 5;
    add_common(lrt_cmd, flags);
    lrt_cmd->add_option("--data", lrt_data, "observation log csv")->required();
    lrt_cmd->add_option("--models", lrt_models, "restricted,full (e.g. mvt1,mvt2)")
        ->required();
    lrt_cmd->add_option("--passes", lrt_passes, "training passes")->check(CLI::Range(1, 100));
    lrt_cmd->callback(
        [&] { action = [&] { return cmd_lrt(flags, lrt_data, lrt_models, lrt_passes); }; });

    auto* snapshot = app.add_subcommand("snapshot", "save or load a model snapshot");
    snapshot->require_subcommand(1);
    auto* snap_save = snapshot->add_subcommand("save", "train per config and save");
    std::string snap_out, snap_in;
    add_common(snap_save, flags);
    snap_save->add_option("--out", snap_out, "snapshot file")->required();
    snap_save->callback(
        [&] { action = [&] { return cmd_snapshot_save(flags, snap_out); }; });
    auto* snap_load = snapshot->add_subcommand("load", "load and describe a snapshot");
    snap_load->add_option("--in", snap_in, "snapshot file")->required();
    snap_load->callback([&] { action = [&] { return cmd_snapshot_load(snap_in); }; });

    auto* select = app.add_subcommand("select", "one realtime selection from a snapshot");
    std::string sel_snapshot, sel_context, sel_argmax = "hillclimb";
    std::int64_t sel_seed = 0;
    int sel_restarts = 5, sel_max_steps = 0, sel_repeat = 1;
    select->add_option("--snapshot", sel_snapshot, "snapshot file")->required();
    select->add_option("--context", sel_context, "comma-separated context values");
    select->add_option("--seed", sel_seed, "selection seed");
    select->add_option("--argmax", sel_argmax, "exhaustive | hillclimb");
    select->add_option("--restarts", sel_restarts, "hill climb restarts (S)");
    select->add_option("--max-steps", sel_max_steps, "widget-step budget (K), 0 = 6D");
    select->add_option("--repeat", sel_repeat, "repeat count for latency measurement")
        ->check(CLI::Range(1, 1000000));
    select->callback([&] {
        action = [&] {
            return cmd_select(sel_snapshot, sel_context, sel_seed, sel_argmax,
                              sel_restarts, sel_max_steps, sel_repeat);
        };
    });

    CLI11_PARSE(app, argc, argv);

    try {
        exit_code = action ? action() : kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        exit_code = kExitInvalidInput;
    } catch (const CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        exit_code = kExitInvalidInput;
    } catch (const SnapshotError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case SnapshotError::Kind::VersionMismatch:
                exit_code = kExitSnapshotVersion;
                break;
            case SnapshotError::Kind::Corrupt:
                exit_code = kExitSnapshotCorrupt;
                break;
            case SnapshotError::Kind::Io:
                exit_code = kExitIo;
                break;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        exit_code = kExitUsage;
    }
    return exit_code;
}
