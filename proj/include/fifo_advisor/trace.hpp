#pragma once

// Trace data model for dataflow programs whose tasks talk over bounded
// single-producer single-consumer FIFOs, plus the line-oriented text format
// used to store them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fifo_advisor {

using FifoId = std::uint32_t;
using TaskId = std::uint32_t;
using Depth = std::uint64_t;
using Cycles = std::uint64_t;

struct Compute {
    Cycles cycles = 0;
    bool operator==(const Compute&) const = default;
};

struct Read {
    FifoId fifo = 0;
    bool operator==(const Read&) const = default;
};

struct Write {
    FifoId fifo = 0;
    bool operator==(const Write&) const = default;
};

using Event = std::variant<Compute, Read, Write>;

struct FifoDecl {
    FifoId id = 0;
    std::string name;
    std::uint32_t bitwidth = 1;
    std::optional<std::string> group;
    std::optional<Depth> declared_depth;
    // Derived from the task bodies; empty for channels that are never touched.
    std::optional<TaskId> producer_task;
    std::optional<TaskId> consumer_task;

    bool operator==(const FifoDecl&) const = default;
};

struct TaskTrace {
    TaskId id = 0;
    std::string name;
    std::vector<Event> events;

    bool operator==(const TaskTrace&) const = default;
};

struct TraceProgram {
    std::string name;
    std::vector<FifoDecl> fifos;  // indexed by FifoId
    std::vector<TaskTrace> tasks; // indexed by TaskId

    bool operator==(const TraceProgram&) const = default;

    std::size_t fifo_count() const noexcept { return fifos.size(); }
    std::size_t task_count() const noexcept { return tasks.size(); }
};

/// One depth per FIFO, indexed by FifoId.
struct FifoConfig {
    std::vector<Depth> depths;

    bool operator==(const FifoConfig&) const = default;
    auto operator<=>(const FifoConfig&) const = default;
};

/// Per-FIFO channel statistics derived from a program's event lists.
struct ChannelCounts {
    std::vector<std::uint64_t> writes;
    std::vector<std::uint64_t> reads;
};

struct Diagnostic {
    std::size_t line = 0; // 1-based, 0 when not tied to a line
    std::size_t column = 0;
    std::string message;
};

/// Malformed input: bad token, unknown directive, bad number.
class TraceSyntaxError : public std::runtime_error {
public:
    TraceSyntaxError(std::size_t line, std::size_t column, const std::string& message);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed input that violates a structural invariant. Carries every
/// violation found, not just the first.
class TraceValidationError : public std::runtime_error {
public:
    explicit TraceValidationError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

TraceProgram parse_trace(std::string_view text);
std::string serialize_trace(const TraceProgram& program);

/// Fills producer/consumer tasks and checks every structural invariant.
/// Throws TraceValidationError listing all violations.
void validate(TraceProgram& program);

ChannelCounts channel_counts(const TraceProgram& program);

/// Declared depth if present, else the number of writes observed, never below 2.
Depth upper_bound(const TraceProgram& program, FifoId fifo);
std::vector<Depth> upper_bounds(const TraceProgram& program);

/// Partition of FIFO ids: FIFOs sharing a group label form one cell (in order
/// of first appearance), ungrouped FIFOs are singletons.
std::vector<std::vector<FifoId>> fifo_groups(const TraceProgram& program);

std::uint64_t event_count(const TraceProgram& program);

/// Checks that `config` has one depth per FIFO with 2 <= depth <= upper_bound.
/// Throws TraceValidationError naming every offending FIFO.
void check_config_bounds(const TraceProgram& program, const FifoConfig& config);

} // namespace fifo_advisor
