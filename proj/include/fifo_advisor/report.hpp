#pragma once

// JSON and CSV encodings of configurations and results.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fifo_advisor/optimizer.hpp"
#include "fifo_advisor/simulator.hpp"
#include "fifo_advisor/trace.hpp"

namespace fifo_advisor {

/// `{ "depths": { "<fifo name>": <int>, ... } }`; every FIFO must appear
/// exactly once. Throws TraceValidationError on mismatch, std::invalid_argument
/// on malformed JSON.
FifoConfig parse_config_json(const TraceProgram& program, std::string_view text);
nlohmann::ordered_json config_json(const TraceProgram& program, const FifoConfig& config);

nlohmann::ordered_json sim_result_json(const TraceProgram& program, const FifoConfig& config,
                                       const SimResult& result, TimingMode mode);

nlohmann::ordered_json breakpoints_json(const TraceProgram& program);

/// Frontier point with its scores against each feasible baseline (null when
/// the baseline deadlocks).
nlohmann::ordered_json point_json(const TraceProgram& program, const EvaluatedPoint& point,
                                  const EvaluatedPoint& baseline_max, const EvaluatedPoint& baseline_min,
                                  double alpha);

struct NamedRun {
    std::string optimizer;
    const SearchResult* result;
};

/// Header plus one row per evaluation: optimizer, index, feasible, latency,
/// bram, then one depth column per FIFO.
void write_evaluation_csv(std::ostream& out, const TraceProgram& program, const std::vector<NamedRun>& runs);

} // namespace fifo_advisor
