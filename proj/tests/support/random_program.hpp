#pragma once

#include <cstdint>
#include <random>

#include "fifo_advisor/trace.hpp"

namespace fifo_advisor::testing {

struct FuzzShape {
    std::uint32_t max_tasks = 5;
    std::uint32_t max_fifos = 6;
    std::uint32_t max_tokens = 8;
    Cycles max_compute = 4;
    std::uint32_t widths[4] = {8, 32, 64, 512};
};

/// Small random program that passes validation: every fifo links two
/// distinct tasks, reads never exceed writes, and each task's events are a
/// random interleaving with compute gaps. Programs that deadlock even with
/// unbounded fifos are redrawn.
TraceProgram random_program(std::mt19937_64& rng, const FuzzShape& shape = {});

/// Random config with 1 <= depth <= upper_bound + 1 per fifo.
FifoConfig random_config(std::mt19937_64& rng, const TraceProgram& program, Depth min_depth = 1);

} // namespace fifo_advisor::testing
