#pragma once

// Synthetic dataflow traces used by the tests and benchmarks.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fifo_advisor/trace.hpp"

namespace fifo_advisor {

enum class BenchPattern {
    Chain,         // linear pipeline, one fifo per stage boundary
    Tree,          // reduction tree; fanout children feed each node
    WriteThenRead, // producer writes x n times then y n times, consumer alternates x/y
    Ring,          // every task writes its whole output before reading its input
    RandomDAG,     // seeded acyclic graph, some nodes burst one output before the next
};

struct BenchSpec {
    BenchPattern pattern = BenchPattern::Chain;
    std::uint32_t stages = 3;
    std::uint32_t fanout = 2;
    std::uint32_t tokens = 16;
    std::vector<std::uint32_t> widths{32};
    std::pair<Cycles, Cycles> compute_jitter{0, 3};
    std::uint32_t n = 8; // WriteThenRead only
    std::uint64_t seed = 1;
    bool grouping = true;
    std::uint32_t edges = 0; // RandomDAG: exact fifo count, 0 picks from fanout
    std::string name;        // defaults to a name derived from the parameters
};

/// Throws std::invalid_argument for stages == 0, tokens == 0, empty widths,
/// zero width, or an inverted jitter range.
TraceProgram generate(const BenchSpec& spec);

const char* to_string(BenchPattern pattern) noexcept;
std::optional<BenchPattern> parse_pattern(std::string_view name);

inline constexpr int kSuiteVersion = 1;

/// The fixed benchmark corpus, in a stable order.
std::vector<BenchSpec> default_suite();

/// Writes one `<name>.trace` file per suite entry and returns the paths.
std::vector<std::filesystem::path> generate_suite(const std::filesystem::path& out_dir);

} // namespace fifo_advisor
