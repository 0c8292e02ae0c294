#include "fifo_advisor/report.hpp"

#include <cmath>
#include <ostream>
#include <unordered_map>

#include "fifo_advisor/memory_model.hpp"

namespace fifo_advisor {

using nlohmann::ordered_json;

FifoConfig parse_config_json(const TraceProgram& program, std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("depths") || !doc["depths"].is_object())
        throw std::invalid_argument("config must be an object with a \"depths\" object");

    std::unordered_map<std::string, FifoId> by_name;
    for (const auto& f : program.fifos)
        by_name.emplace(f.name, f.id);

    std::vector<Diagnostic> errors;
    FifoConfig config{std::vector<Depth>(program.fifos.size(), 0)};
    std::vector<bool> seen(program.fifos.size(), false);
    for (const auto& [name, value] : doc["depths"].items()) {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            errors.push_back({0, 0, "config names unknown fifo '" + name + "'"});
            continue;
        }
        if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0) {
            errors.push_back({0, 0, "depth of fifo '" + name + "' must be a positive integer"});
            continue;
        }
        config.depths[it->second] = value.get<std::uint64_t>();
        seen[it->second] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            errors.push_back({0, 0, "config is missing fifo '" + program.fifos[i].name + "'"});
    if (!errors.empty())
        throw TraceValidationError(std::move(errors));
    return config;
}

ordered_json config_json(const TraceProgram& program, const FifoConfig& config) {
    ordered_json depths = ordered_json::object();
    for (std::size_t i = 0; i < config.depths.size(); ++i)
        depths[program.fifos.at(i).name] = config.depths[i];
    return ordered_json{{"depths", depths}};
}

ordered_json sim_result_json(const TraceProgram& program, const FifoConfig& config, const SimResult& result,
                             TimingMode mode) {
    ordered_json out;
    out["program"] = program.name;
    out["mode"] = to_string(mode);
    out["deadlocked"] = result.deadlocked;
    out["latency"] = result.latency;
    out["bram"] = config_bram_count(program, config);
    if (result.deadlocked) {
        auto chain = detect_deadlock_cycle(result, program);
        ordered_json edges = ordered_json::array();
        for (const auto& e : chain.edges)
            edges.push_back({{"task", program.tasks[e.task].name},
                             {"fifo", program.fifos[e.fifo].name},
                             {"blocked_on", to_string(e.kind)}});
        out["deadlock"] = {{"cycle", result.deadlock->cycle},
                           {"cyclic", chain.cyclic},
                           {"wait_for", edges},
                           {"description", describe(chain, program)}};
    }
    ordered_json fifos = ordered_json::array();
    for (std::size_t i = 0; i < program.fifos.size(); ++i)
        fifos.push_back({{"name", program.fifos[i].name},
                         {"depth", config.depths[i]},
                         {"peak_occupancy", result.peak_occupancy[i]},
                         {"stall_cycles", result.stall_cycles[i]},
                         {"tokens_read", result.tokens_read[i]}});
    out["fifos"] = fifos;
    return out;
}

ordered_json breakpoints_json(const TraceProgram& program) {
    auto all = program_breakpoints(program);
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < all.size(); ++i)
        out[program.fifos[i].name] = all[i];
    return out;
}

namespace {

ordered_json score_or_null(const EvaluatedPoint& point, const EvaluatedPoint& baseline, double alpha) {
    if (!baseline.feasible)
        return nullptr;
    double s = score(point, baseline, alpha);
    if (std::isinf(s))
        return "inf";
    return s;
}

} // namespace

ordered_json point_json(const TraceProgram& program, const EvaluatedPoint& point, const EvaluatedPoint& baseline_max,
                        const EvaluatedPoint& baseline_min, double alpha) {
    ordered_json out;
    out["latency"] = point.latency;
    out["bram"] = point.bram;
    out["score_vs_baseline_max"] = score_or_null(point, baseline_max, alpha);
    out["score_vs_baseline_min"] = score_or_null(point, baseline_min, alpha);
    out["config"] = config_json(program, point.config)["depths"];
    return out;
}

void write_evaluation_csv(std::ostream& out, const TraceProgram& program, const std::vector<NamedRun>& runs) {
    out << "optimizer,index,feasible,latency,bram";
    for (const auto& f : program.fifos)
        out << ',' << f.name;
    out << '\n';
    for (const auto& run : runs) {
        std::size_t index = 0;
        for (const auto& p : run.result->evaluations) {
            out << run.optimizer << ',' << index++ << ',' << (p.feasible ? 1 : 0) << ',';
            if (p.feasible)
                out << p.latency;
            out << ',' << p.bram;
            for (Depth d : p.config.depths)
                out << ',' << d;
            out << '\n';
        }
    }
}

} // namespace fifo_advisor
