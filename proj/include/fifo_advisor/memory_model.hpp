#pragma once

// BRAM cost model for FIFOs mapped to BRAM_18K primitives.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fifo_advisor/trace.hpp"

namespace fifo_advisor {

struct BramShape {
    std::uint64_t rows;
    std::uint32_t width;
};

/// BRAM_18K aspect ratios in allocation order (UltraScale+).
inline constexpr std::array<BramShape, 5> kBram18kShapes{{
    {1024, 18},
    {2048, 9},
    {4096, 4},
    {8192, 2},
    {16384, 1},
}};

/// Bits below which (or depth at which) a FIFO becomes a shift register.
inline constexpr std::uint64_t kShiftRegisterBits = 1024;

/// True when the FIFO is implemented without BRAM: depth <= 2 or at most 1K bits.
bool is_shift_register(Depth depth, std::uint32_t width) noexcept;

/// BRAM count for one FIFO. Widths are first packed into the widest shape,
/// the remainder spills to the next one; a leftover that fits the depth of
/// the current shape takes one more block and stops.
std::uint64_t fifo_bram_count(Depth depth, std::uint32_t width,
                              std::span<const BramShape> shapes = kBram18kShapes) noexcept;

std::uint64_t config_bram_count(const TraceProgram& program, const FifoConfig& config);

/// Depths in [lower, upper] that maximally use their BRAM allocation, plus
/// `upper` itself. Sorted ascending, never empty.
std::vector<Depth> breakpoints(std::uint32_t width, Depth upper, Depth lower = 2,
                               std::span<const BramShape> shapes = kBram18kShapes);

/// Candidate depths for every FIFO of a program, bounded by upper_bound().
std::vector<std::vector<Depth>> program_breakpoints(const TraceProgram& program);

} // namespace fifo_advisor
