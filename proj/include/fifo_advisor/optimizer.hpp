#pragma once

// Design-space exploration over FIFO depths: two objectives (latency from
// the simulator, BRAM from the memory model) under a hard no-deadlock
// constraint. All searches run over the pruned breakpoint space and are
// deterministic for a given seed.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fifo_advisor/simulator.hpp"
#include "fifo_advisor/trace.hpp"

namespace fifo_advisor {

inline constexpr Cycles kInfiniteLatency = std::numeric_limits<Cycles>::max();

struct EvaluatedPoint {
    FifoConfig config;
    Cycles latency = kInfiniteLatency; // kInfiniteLatency when deadlocked
    std::uint64_t bram = 0;
    bool feasible = false;

    bool operator==(const EvaluatedPoint&) const = default;
};

/// Non-dominated feasible points sorted by latency ascending (bram descending).
struct ParetoFrontier {
    std::vector<EvaluatedPoint> points;

    bool operator==(const ParetoFrontier&) const = default;
    bool empty() const noexcept { return points.empty(); }
};

struct AnnealingSchedule {
    double initial_temperature = 1.0;
    double cooling = 0.95;
    unsigned steps_per_temperature = 10;
};

struct SearchBudget {
    std::uint64_t max_evaluations = 1000;
    std::uint64_t seed = 0;
    unsigned beta_count = 10;
    double epsilon = 0.05;
    AnnealingSchedule schedule;
    // Weight raw cycles and raw BRAM counts instead of ratios to Baseline-Max.
    bool raw_scalarization = false;
    unsigned jobs = 1;
};

struct SearchResult {
    ParetoFrontier frontier;
    std::vector<EvaluatedPoint> evaluations; // one entry per simulate call, in order
    std::vector<std::string> warnings;
};

enum class OptimizerKind { Random, GroupedRandom, Annealing, GroupedAnnealing, Greedy };

const char* to_string(OptimizerKind kind) noexcept;
std::optional<OptimizerKind> parse_optimizer(std::string_view name);
inline constexpr OptimizerKind kAllOptimizers[] = {OptimizerKind::Random, OptimizerKind::GroupedRandom,
                                                   OptimizerKind::Annealing, OptimizerKind::GroupedAnnealing,
                                                   OptimizerKind::Greedy};

/// One search coordinate: a set of FIFOs that always share a depth, and the
/// depths it may take.
struct SearchDimension {
    std::vector<FifoId> members;
    std::vector<Depth> candidates;
};

struct SearchSpace {
    std::vector<SearchDimension> dimensions;
    std::vector<std::string> warnings;

    /// Number of distinct configurations, saturating at UINT64_MAX.
    std::uint64_t size() const noexcept;
    FifoConfig config_for(const std::vector<std::size_t>& indices, std::size_t fifo_count) const;
};

/// Per-FIFO space, or one dimension per group cell when `grouped`. A group
/// with mixed widths is split back into per-FIFO dimensions with a warning.
SearchSpace make_search_space(const TraceProgram& program, bool grouped);

FifoConfig baseline_max(const TraceProgram& program);
FifoConfig baseline_min(const TraceProgram& program);

EvaluatedPoint make_point(const TraceProgram& program, const FifoConfig& config, const SimResult& result);
EvaluatedPoint evaluate_point(const TraceProgram& program, const FifoConfig& config,
                              TimingMode mode = TimingMode::Uniform);

/// True when `a` is no worse in both objectives and better in one.
bool dominates(const EvaluatedPoint& a, const EvaluatedPoint& b) noexcept;

/// Non-dominated feasible subset; among exact objective ties the first one
/// encountered is kept.
ParetoFrontier pareto_filter(const std::vector<EvaluatedPoint>& points);

SearchResult random_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode);
SearchResult grouped_random_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode);
SearchResult simulated_annealing(const TraceProgram& program, const SearchBudget& budget, TimingMode mode);
SearchResult grouped_simulated_annealing(const TraceProgram& program, const SearchBudget& budget, TimingMode mode);
SearchResult greedy_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode);

SearchResult run_optimizer(OptimizerKind kind, const TraceProgram& program, const SearchBudget& budget,
                           TimingMode mode);

/// Weights used by the annealing chains: N values spread evenly over [0, 1].
std::vector<double> beta_grid(unsigned count);

/// alpha * latency ratio + (1 - alpha) * bram ratio against `baseline`.
/// A zero-BRAM baseline gives a bram ratio of 0 for zero-BRAM points and
/// +inf otherwise. Throws std::invalid_argument on infeasible inputs.
double score(const EvaluatedPoint& point, const EvaluatedPoint& baseline, double alpha);

/// Frontier point with the lowest score; ties go to lower latency, then
/// lower bram. Throws std::invalid_argument on an empty frontier.
EvaluatedPoint highlight(const ParetoFrontier& frontier, const EvaluatedPoint& baseline, double alpha);

/// Area dominated by the frontier inside the box bounded by the reference
/// point (both objectives minimized).
double hypervolume(const ParetoFrontier& frontier, double ref_latency, double ref_bram);

} // namespace fifo_advisor
