#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fifo_advisor/benchgen.hpp"
#include "fifo_advisor/memory_model.hpp"
#include "fifo_advisor/optimizer.hpp"
#include "fifo_advisor/report.hpp"
#include "fifo_advisor/simulator.hpp"
#include "fifo_advisor/trace.hpp"

namespace fs = std::filesystem;
using namespace fifo_advisor;
using nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kIoError = 1, kValidationError = 2, kUsageError = 3 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text))
        throw IoError("cannot write '" + path.string() + "'");
}

TraceProgram load_trace(const std::string& path) {
    return parse_trace(read_file(path));
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("fifo-advisor");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("FIFO_ADVISOR_LOG"))
        spdlog::set_level(spdlog::level::from_str(env));
}

int cmd_validate(const std::string& path) {
    auto p = load_trace(path);
    auto counts = channel_counts(p);
    auto bounds = upper_bounds(p);
    std::cout << p.tasks.size() << " tasks, " << p.fifos.size() << " fifos, " << event_count(p) << " events\n";
    for (const auto& f : p.fifos) {
        std::cout << "  " << f.name << ": width=" << f.bitwidth << " writes=" << counts.writes[f.id]
                  << " upper_bound=" << bounds[f.id];
        if (f.group)
            std::cout << " group=" << *f.group;
        std::cout << '\n';
    }
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& config_path, const std::string& baseline,
                 TimingMode mode) {
    auto p = load_trace(path);
    FifoConfig config;
    if (!config_path.empty())
        config = parse_config_json(p, read_file(config_path));
    else if (baseline == "min")
        config = baseline_min(p);
    else
        config = baseline_max(p);
    auto result = simulate(p, config, mode);
    std::cout << sim_result_json(p, config, result, mode).dump(2) << '\n';
    if (result.deadlocked)
        spdlog::warn("configuration deadlocks at cycle {}", result.deadlock->cycle);
    return kOk;
}

int cmd_breakpoints(const std::string& path) {
    auto p = load_trace(path);
    std::cout << breakpoints_json(p).dump(2) << '\n';
    return kOk;
}

struct OptimizeArgs {
    std::string trace;
    std::string optimizer = "all";
    SearchBudget budget;
    double alpha = 0.7;
    TimingMode mode = TimingMode::Uniform;
    std::string out = "fifo-advisor-out";
};

ordered_json baseline_json(const EvaluatedPoint& p) {
    ordered_json j;
    j["feasible"] = p.feasible;
    j["latency"] = p.feasible ? ordered_json(p.latency) : ordered_json(nullptr);
    j["bram"] = p.bram;
    return j;
}

int cmd_optimize(const OptimizeArgs& args) {
    auto p = load_trace(args.trace);
    std::vector<OptimizerKind> kinds;
    if (args.optimizer == "all")
        kinds.assign(std::begin(kAllOptimizers), std::end(kAllOptimizers));
    else
        kinds.push_back(*parse_optimizer(args.optimizer));

    const fs::path out_dir = args.out;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    const auto bmax = evaluate_point(p, baseline_max(p), args.mode);
    const auto bmin = evaluate_point(p, baseline_min(p), args.mode);
    if (!bmax.feasible)
        spdlog::warn("Baseline-Max deadlocks; scores against it are omitted");

    std::vector<SearchResult> results;
    std::vector<double> seconds;
    for (auto kind : kinds) {
        spdlog::info("running {}", to_string(kind));
        const auto start = std::chrono::steady_clock::now();
        results.push_back(run_optimizer(kind, p, args.budget, args.mode));
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        for (const auto& w : results.back().warnings)
            spdlog::warn("{}: {}", to_string(kind), w);
    }

    ordered_json summary;
    summary["program"] = p.name;
    summary["mode"] = to_string(args.mode);
    summary["alpha"] = args.alpha;
    summary["budget"] = args.budget.max_evaluations;
    summary["seed"] = args.budget.seed;
    summary["baseline_max"] = baseline_json(bmax);
    summary["baseline_min"] = baseline_json(bmin);
    ordered_json rows = ordered_json::array();

    std::vector<NamedRun> runs;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto& r = results[i];
        const std::string name = to_string(kinds[i]);
        runs.push_back({name, &r});

        ordered_json frontier = ordered_json::array();
        for (const auto& pt : r.frontier.points)
            frontier.push_back(point_json(p, pt, bmax, bmin, args.alpha));
        ordered_json doc;
        doc["optimizer"] = name;
        doc["evaluations"] = r.evaluations.size();
        doc["warnings"] = r.warnings;
        doc["frontier"] = frontier;
        write_file(out_dir / (name + ".frontier.json"), doc.dump(2) + "\n");

        ordered_json row;
        row["optimizer"] = name;
        row["evaluations"] = r.evaluations.size();
        row["frontier_size"] = r.frontier.points.size();
        if (r.frontier.empty()) {
            spdlog::warn("{}: no feasible configuration found", name);
            row["highlighted"] = nullptr;
        } else {
            // Highlight against Baseline-Max when it is usable, else against
            // the frontier's own fastest point.
            const auto& ref = bmax.feasible ? bmax : r.frontier.points.front();
            const auto best = highlight(r.frontier, ref, args.alpha);
            row["highlighted"] = point_json(p, best, bmax, bmin, args.alpha);
            if (bmax.feasible) {
                row["latency_ratio"] = static_cast<double>(best.latency) / static_cast<double>(bmax.latency);
                row["bram_reduction"] = bmax.bram ? ordered_json(1.0 - static_cast<double>(best.bram) /
                                                                          static_cast<double>(bmax.bram))
                                                  : ordered_json(nullptr);
            }
            row["undeadlocked"] = !bmin.feasible && best.feasible;
        }
        rows.push_back(row);
    }
    summary["optimizers"] = rows;
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");

    std::ostringstream csv;
    write_evaluation_csv(csv, p, runs);
    write_file(out_dir / "evaluations.csv", csv.str());

    // Human summary, stderr only so the files stay reproducible.
    std::cerr << std::left << std::setw(16) << "optimizer" << std::setw(8) << "evals" << std::setw(10) << "frontier"
              << std::setw(12) << "latency" << std::setw(8) << "bram"
              << "seconds\n";
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const auto& row = rows[i];
        std::cerr << std::setw(16) << to_string(kinds[i]) << std::setw(8) << results[i].evaluations.size()
                  << std::setw(10) << results[i].frontier.points.size();
        if (row["highlighted"].is_null())
            std::cerr << std::setw(12) << "-" << std::setw(8) << "-";
        else
            std::cerr << std::setw(12) << row["highlighted"]["latency"].get<Cycles>() << std::setw(8)
                      << row["highlighted"]["bram"].get<std::uint64_t>();
        std::cerr << std::fixed << std::setprecision(3) << seconds[i] << '\n';
    }
    return kOk;
}

struct BenchArgs {
    std::string out = "corpus";
    std::string pattern;
    BenchSpec spec;
};

int cmd_benchgen(const BenchArgs& args) {
    if (args.pattern.empty()) {
        for (const auto& path : generate_suite(args.out))
            std::cout << path.string() << '\n';
        return kOk;
    }
    BenchSpec spec = args.spec;
    spec.pattern = *parse_pattern(args.pattern);
    auto p = generate(spec);
    fs::create_directories(args.out);
    auto path = fs::path(args.out) / (p.name + ".trace");
    write_file(path, serialize_trace(p));
    std::cout << path.string() << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"FIFO depth advisor for dataflow traces"};
    app.require_subcommand(1);

    const std::map<std::string, TimingMode> modes{{"uniform", TimingMode::Uniform},
                                                 {"depth-aware", TimingMode::DepthAware}};
    std::vector<std::string> optimizer_names{"all"};
    for (auto k : kAllOptimizers)
        optimizer_names.emplace_back(to_string(k));
    std::vector<std::string> pattern_names;
    for (auto b : {BenchPattern::Chain, BenchPattern::Tree, BenchPattern::WriteThenRead, BenchPattern::Ring,
                   BenchPattern::RandomDAG})
        pattern_names.emplace_back(to_string(b));

    std::string trace;
    auto* validate_cmd = app.add_subcommand("validate", "Check a trace and print a summary");
    validate_cmd->add_option("trace", trace, "Trace file")->required();

    std::string config_path, baseline = "max";
    TimingMode mode = TimingMode::Uniform;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one depth configuration");
    simulate_cmd->add_option("trace", trace, "Trace file")->required();
    auto* config_opt = simulate_cmd->add_option("--config", config_path, "Depth configuration JSON");
    simulate_cmd->add_option("--baseline", baseline, "Use a baseline configuration")
        ->check(CLI::IsMember({"max", "min"}))
        ->excludes(config_opt);
    simulate_cmd->add_option("--mode", mode, "Timing mode")->transform(CLI::CheckedTransformer(modes));

    auto* breakpoints_cmd = app.add_subcommand("breakpoints", "Print candidate depths per fifo");
    breakpoints_cmd->add_option("trace", trace, "Trace file")->required();

    OptimizeArgs opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "Search for Pareto-optimal depth configurations");
    optimize_cmd->add_option("trace", opt.trace, "Trace file")->required();
    optimize_cmd->add_option("--optimizer", opt.optimizer, "Search strategy")->check(CLI::IsMember(optimizer_names));
    optimize_cmd->add_option("--budget", opt.budget.max_evaluations, "Simulation budget per optimizer")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    optimize_cmd->add_option("--seed", opt.budget.seed, "Random seed");
    optimize_cmd->add_option("--beta-count", opt.budget.beta_count, "Annealing chains")->check(CLI::PositiveNumber);
    optimize_cmd->add_option("--epsilon", opt.budget.epsilon, "Greedy latency slack")->check(CLI::NonNegativeNumber);
    optimize_cmd->add_option("--t0", opt.budget.schedule.initial_temperature, "Annealing start temperature");
    optimize_cmd->add_option("--cooling", opt.budget.schedule.cooling, "Annealing cooling factor")
        ->check(CLI::Range(0.0, 1.0));
    optimize_cmd->add_option("--steps-per-temperature", opt.budget.schedule.steps_per_temperature,
                             "Annealing steps between cooling");
    optimize_cmd->add_option("--alpha", opt.alpha, "Latency weight of the highlight score")->check(CLI::Range(0.0, 1.0));
    optimize_cmd->add_option("--mode", opt.mode, "Timing mode")->transform(CLI::CheckedTransformer(modes));
    optimize_cmd->add_flag("--raw-scalarization", opt.budget.raw_scalarization,
                           "Anneal on raw cycles and BRAM counts");
    opt.budget.jobs = 0;
    optimize_cmd->add_option("--jobs", opt.budget.jobs, "Worker threads, 0 for all cores");
    optimize_cmd->add_option("--out", opt.out, "Output directory");

    BenchArgs bench;
    std::uint32_t width = 32;
    auto* benchgen_cmd = app.add_subcommand("benchgen", "Write the benchmark corpus or a single benchmark");
    benchgen_cmd->add_option("--out", bench.out, "Output directory");
    benchgen_cmd->add_option("--pattern", bench.pattern, "Generate one benchmark of this pattern")
        ->check(CLI::IsMember(pattern_names));
    benchgen_cmd->add_option("--stages", bench.spec.stages)->check(CLI::PositiveNumber);
    benchgen_cmd->add_option("--fanout", bench.spec.fanout)->check(CLI::PositiveNumber);
    benchgen_cmd->add_option("--tokens", bench.spec.tokens)->check(CLI::PositiveNumber);
    benchgen_cmd->add_option("--n", bench.spec.n)->check(CLI::PositiveNumber);
    benchgen_cmd->add_option("--edges", bench.spec.edges);
    benchgen_cmd->add_option("--width", width)->check(CLI::PositiveNumber);
    benchgen_cmd->add_option("--seed", bench.spec.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }
    bench.spec.widths = {width};

    try {
        if (*validate_cmd)
            return cmd_validate(trace);
        if (*simulate_cmd)
            return cmd_simulate(trace, config_path, baseline, mode);
        if (*breakpoints_cmd)
            return cmd_breakpoints(trace);
        if (*optimize_cmd)
            return cmd_optimize(opt);
        if (*benchgen_cmd)
            return cmd_benchgen(bench);
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    } catch (const TraceSyntaxError& e) {
        spdlog::error("{}: {}", trace.empty() ? opt.trace : trace, e.what());
        return kValidationError;
    } catch (const TraceValidationError& e) {
        for (const auto& d : e.diagnostics())
            spdlog::error("{}", d.message);
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kValidationError;
    } catch (const std::runtime_error& e) {
        spdlog::error("{}", e.what());
        return kIoError;
    }
    return kUsageError;
}
