#include "fifo_advisor/memory_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace fifo_advisor {

bool is_shift_register(Depth depth, std::uint32_t width) noexcept {
    return depth <= 2 || depth * width <= kShiftRegisterBits;
}

std::uint64_t fifo_bram_count(Depth depth, std::uint32_t width, std::span<const BramShape> shapes) noexcept {
    if (is_shift_register(depth, width))
        return 0;
    std::uint64_t count = 0;
    std::uint64_t bits = width;
    for (const auto& shape : shapes) {
        count += (bits / shape.width) * ((depth + shape.rows - 1) / shape.rows);
        bits %= shape.width;
        if (bits > 0 && depth <= shape.rows) {
            ++count;
            bits = 0;
        }
    }
    return count;
}

std::uint64_t config_bram_count(const TraceProgram& program, const FifoConfig& config) {
    if (config.depths.size() != program.fifos.size())
        throw std::invalid_argument("config has " + std::to_string(config.depths.size()) + " depths for " +
                                    std::to_string(program.fifos.size()) + " fifos");
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < config.depths.size(); ++i)
        total += fifo_bram_count(config.depths[i], program.fifos[i].bitwidth);
    return total;
}

std::vector<Depth> breakpoints(std::uint32_t width, Depth upper, Depth lower, std::span<const BramShape> shapes) {
    if (width == 0)
        throw std::invalid_argument("breakpoints: width must be positive");
    if (upper < lower)
        throw std::invalid_argument("breakpoints: upper bound below lower bound");

    // The cost only changes where the shift-register guard stops applying or
    // where some ceil(d / rows) or (d <= rows) test flips, i.e. at multiples
    // of a shape's row count.
    std::vector<Depth> candidates;
    candidates.push_back(std::max<Depth>(2, kShiftRegisterBits / width));
    for (const auto& shape : shapes)
        for (Depth d = shape.rows; d < upper; d += shape.rows)
            candidates.push_back(d);

    std::vector<Depth> out;
    for (Depth d : candidates)
        if (d >= lower && d < upper && fifo_bram_count(d + 1, width, shapes) > fifo_bram_count(d, width, shapes))
            out.push_back(d);
    out.push_back(upper);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::vector<Depth>> program_breakpoints(const TraceProgram& program) {
    auto bounds = upper_bounds(program);
    std::vector<std::vector<Depth>> out;
    out.reserve(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
        out.push_back(breakpoints(program.fifos[i].bitwidth, bounds[i]));
    return out;
}

} // namespace fifo_advisor
