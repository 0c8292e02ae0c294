#pragma once

// Trace-replay simulation of a dataflow program under a FIFO depth
// configuration.
//
// Timing rules (all tasks start at cycle 0):
//  - Compute(k) advances the task's local time by k.
//  - Write of token k at local time t completes at the first cycle t' >= t
//    with a free slot; the task continues at t' + 1.
//  - Read of token k at local time t completes at the first cycle r >= t
//    where the token was written at least L cycles earlier; the task
//    continues at r + 1 and the slot frees at r + 1.
//  - L is 1, or 2 for BRAM-backed FIFOs in DepthAware mode.
// Because channels are single-producer single-consumer and FIFO ordered,
// write k waits for read k - depth and read k waits for write k, so the
// whole run is the least fixed point of a max-plus system. The engine
// below solves it event by event, waking a blocked task only when the one
// value it waits on becomes known.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fifo_advisor/trace.hpp"

namespace fifo_advisor {

enum class TimingMode { Uniform, DepthAware };

enum class BlockKind { Full, Empty };

struct WaitEdge {
    TaskId task = 0;
    FifoId fifo = 0;
    BlockKind kind = BlockKind::Empty;

    bool operator==(const WaitEdge&) const = default;
};

struct DeadlockInfo {
    Cycles cycle = 0;
    // Every permanently blocked task, ordered by task id.
    std::vector<WaitEdge> blocked;

    bool operator==(const DeadlockInfo&) const = default;
};

struct SimResult {
    // Completion time, or the cycle at which the run became quiescent when
    // deadlocked.
    Cycles latency = 0;
    bool deadlocked = false;
    std::optional<DeadlockInfo> deadlock;
    std::vector<std::uint64_t> peak_occupancy;
    std::vector<std::uint64_t> stall_cycles;
    std::vector<std::uint64_t> tokens_read;

    bool operator==(const SimResult&) const = default;
};

/// Wait-for chain extracted from a deadlocked run. `cyclic` is false when
/// the blocked tasks wait on a finished task rather than on each other.
struct WaitForChain {
    std::vector<WaitEdge> edges;
    bool cyclic = false;

    bool operator==(const WaitForChain&) const = default;
};

/// Read latency of every FIFO under `mode` for the given depths.
std::vector<std::uint32_t> read_latencies(const TraceProgram& program, const FifoConfig& config, TimingMode mode);

/// Immutable, preprocessed view of a program that any number of threads can
/// simulate against concurrently.
class CompiledTrace {
public:
    explicit CompiledTrace(const TraceProgram& program);

    SimResult simulate(const FifoConfig& config, TimingMode mode) const;

    const TraceProgram& program() const noexcept { return *program_; }

    struct Op {
        Cycles delay;        // compute cycles before the op
        std::uint32_t fifo;
        std::uint32_t token; // index of the token within its fifo
        bool write;
    };

private:
    const TraceProgram* program_;
    std::vector<Op> ops_;
    std::vector<std::size_t> task_begin_; // size tasks + 1
    std::vector<Cycles> tail_delay_;
    std::vector<std::uint64_t> writes_;
    std::vector<std::uint64_t> reads_;
    std::vector<std::size_t> write_offset_;
    std::vector<std::size_t> read_offset_;
    std::vector<TaskId> producer_;
    std::vector<TaskId> consumer_;
};

/// Checks depth count and depth >= 1. Throws std::invalid_argument.
void check_simulation_config(const TraceProgram& program, const FifoConfig& config);

SimResult simulate(const TraceProgram& program, const FifoConfig& config, TimingMode mode = TimingMode::Uniform);

/// Element-wise equal to calling simulate() per config; runs on up to
/// `jobs` threads (0 picks the hardware concurrency).
std::vector<SimResult> evaluate_many(const CompiledTrace& trace, std::span<const FifoConfig> configs,
                                     TimingMode mode = TimingMode::Uniform, unsigned jobs = 1);
std::vector<SimResult> evaluate_many(const TraceProgram& program, std::span<const FifoConfig> configs,
                                     TimingMode mode = TimingMode::Uniform, unsigned jobs = 1);

/// Throws std::logic_error when `result` is not deadlocked.
WaitForChain detect_deadlock_cycle(const SimResult& result, const TraceProgram& program);

std::string describe(const WaitForChain& chain, const TraceProgram& program);

const char* to_string(TimingMode mode) noexcept;
const char* to_string(BlockKind kind) noexcept;

} // namespace fifo_advisor
