#include "fifo_advisor/benchgen.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

namespace fifo_advisor {

namespace {

class ProgramBuilder {
public:
    ProgramBuilder(std::string name, std::pair<Cycles, Cycles> jitter, std::uint64_t seed)
        : jitter_(jitter), rng_(seed) {
        program_.name = std::move(name);
    }

    FifoId fifo(std::string name, std::uint32_t width, std::optional<std::string> group = std::nullopt) {
        FifoDecl decl;
        decl.id = static_cast<FifoId>(program_.fifos.size());
        decl.name = std::move(name);
        decl.bitwidth = width;
        decl.group = std::move(group);
        program_.fifos.push_back(std::move(decl));
        return program_.fifos.back().id;
    }

    TaskId task(std::string name) {
        TaskTrace t;
        t.id = static_cast<TaskId>(program_.tasks.size());
        t.name = std::move(name);
        program_.tasks.push_back(std::move(t));
        return program_.tasks.back().id;
    }

    void compute(TaskId t, Cycles cycles) {
        if (cycles)
            program_.tasks[t].events.emplace_back(Compute{cycles});
    }
    void jitter(TaskId t) {
        std::uniform_int_distribution<Cycles> d(jitter_.first, jitter_.second);
        compute(t, d(rng_));
    }
    void read(TaskId t, FifoId f) { program_.tasks[t].events.emplace_back(Read{f}); }
    void write(TaskId t, FifoId f) { program_.tasks[t].events.emplace_back(Write{f}); }

    std::mt19937_64& rng() { return rng_; }

    TraceProgram finish() {
        validate(program_);
        return std::move(program_);
    }

private:
    TraceProgram program_;
    std::pair<Cycles, Cycles> jitter_;
    std::mt19937_64 rng_;
};

std::string default_name(const BenchSpec& s) {
    std::string base = to_string(s.pattern);
    switch (s.pattern) {
    case BenchPattern::WriteThenRead:
        return base + "_n" + std::to_string(s.n);
    case BenchPattern::Tree:
        return base + "_s" + std::to_string(s.stages) + "_f" + std::to_string(s.fanout) + "_t" + std::to_string(s.tokens);
    case BenchPattern::RandomDAG:
        return base + "_s" + std::to_string(s.stages) + (s.edges ? "_e" + std::to_string(s.edges) : std::string()) +
               "_t" + std::to_string(s.tokens);
    default:
        return base + "_s" + std::to_string(s.stages) + "_t" + std::to_string(s.tokens);
    }
}

std::optional<std::string> group_label(const BenchSpec& spec, std::string label) {
    if (!spec.grouping)
        return std::nullopt;
    return label;
}

TraceProgram make_chain(const BenchSpec& spec, ProgramBuilder& b) {
    std::vector<TaskId> stages;
    for (std::uint32_t i = 0; i < spec.stages; ++i)
        stages.push_back(b.task("stage" + std::to_string(i)));
    std::vector<FifoId> links;
    for (std::uint32_t i = 0; i + 1 < spec.stages; ++i)
        links.push_back(b.fifo("s" + std::to_string(i) + "_to_s" + std::to_string(i + 1),
                               spec.widths[i % spec.widths.size()]));
    for (std::uint32_t k = 0; k < spec.tokens; ++k) {
        for (std::uint32_t i = 0; i < spec.stages; ++i) {
            if (i > 0)
                b.read(stages[i], links[i - 1]);
            b.jitter(stages[i]);
            if (i + 1 < spec.stages)
                b.write(stages[i], links[i]);
        }
    }
    return b.finish();
}

TraceProgram make_tree(const BenchSpec& spec, ProgramBuilder& b) {
    if (spec.fanout == 0)
        throw std::invalid_argument("tree fanout must be positive");
    // levels[l][j] is node j of level l; level 0 is the root.
    std::vector<std::vector<TaskId>> levels(spec.stages + 1);
    std::vector<std::vector<FifoId>> up(spec.stages + 1); // fifo from node to its parent
    std::size_t width = 1;
    for (std::uint32_t l = 0; l <= spec.stages; ++l) {
        for (std::size_t j = 0; j < width; ++j)
            levels[l].push_back(b.task("l" + std::to_string(l) + "_n" + std::to_string(j)));
        width *= spec.fanout;
    }
    for (std::uint32_t l = 1; l <= spec.stages; ++l)
        for (std::size_t j = 0; j < levels[l].size(); ++j)
            up[l].push_back(b.fifo("l" + std::to_string(l) + "_n" + std::to_string(j) + "_up",
                                   spec.widths[(l - 1) % spec.widths.size()],
                                   group_label(spec, "level" + std::to_string(l))));

    for (std::uint32_t k = 0; k < spec.tokens; ++k) {
        for (std::uint32_t l = spec.stages + 1; l-- > 0;) {
            for (std::size_t j = 0; j < levels[l].size(); ++j) {
                TaskId t = levels[l][j];
                if (l < spec.stages)
                    for (std::uint32_t c = 0; c < spec.fanout; ++c)
                        b.read(t, up[l + 1][j * spec.fanout + c]);
                b.jitter(t);
                if (l > 0)
                    b.write(t, up[l][j]);
            }
        }
    }
    return b.finish();
}

TraceProgram make_write_then_read(const BenchSpec& spec, ProgramBuilder& b) {
    TaskId producer = b.task("producer");
    TaskId consumer = b.task("consumer");
    FifoId x = b.fifo("x", spec.widths.front());
    FifoId y = b.fifo("y", spec.widths.front());
    for (std::uint32_t i = 0; i < spec.n; ++i)
        b.write(producer, x);
    for (std::uint32_t i = 0; i < spec.n; ++i)
        b.write(producer, y);
    for (std::uint32_t i = 0; i < spec.n; ++i) {
        b.read(consumer, x);
        b.read(consumer, y);
    }
    return b.finish();
}

TraceProgram make_ring(const BenchSpec& spec, ProgramBuilder& b) {
    if (spec.stages < 2)
        throw std::invalid_argument("ring needs at least 2 stages");
    std::vector<TaskId> tasks;
    std::vector<FifoId> links;
    for (std::uint32_t i = 0; i < spec.stages; ++i)
        tasks.push_back(b.task("node" + std::to_string(i)));
    for (std::uint32_t i = 0; i < spec.stages; ++i)
        links.push_back(b.fifo("n" + std::to_string(i) + "_to_n" + std::to_string((i + 1) % spec.stages),
                               spec.widths[i % spec.widths.size()]));
    for (std::uint32_t i = 0; i < spec.stages; ++i) {
        for (std::uint32_t k = 0; k < spec.tokens; ++k) {
            b.jitter(tasks[i]);
            b.write(tasks[i], links[i]);
        }
        for (std::uint32_t k = 0; k < spec.tokens; ++k) {
            b.read(tasks[i], links[(i + spec.stages - 1) % spec.stages]);
            b.jitter(tasks[i]);
        }
    }
    return b.finish();
}

TraceProgram make_random_dag(const BenchSpec& spec, ProgramBuilder& b) {
    const std::uint32_t n = spec.stages;
    auto& rng = b.rng();
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    if (spec.edges) {
        const std::uint64_t max_edges = std::uint64_t{n} * (n - 1) / 2;
        if (spec.edges + 1 < n || spec.edges > max_edges)
            throw std::invalid_argument("random dag edge count must be in [stages - 1, stages * (stages - 1) / 2]");
        for (std::uint32_t i = 1; i < n; ++i)
            edges.insert({std::uniform_int_distribution<std::uint32_t>(0, i - 1)(rng), i});
        while (edges.size() < spec.edges) {
            std::uint32_t dst = std::uniform_int_distribution<std::uint32_t>(1, n - 1)(rng);
            std::uint32_t src = std::uniform_int_distribution<std::uint32_t>(0, dst - 1)(rng);
            edges.insert({src, dst});
        }
    } else {
        for (std::uint32_t i = 1; i < n; ++i) {
            std::uint32_t k = 1 + std::uniform_int_distribution<std::uint32_t>(0, std::min(i, std::max(1u, spec.fanout)) - 1)(rng);
            std::vector<std::uint32_t> preds(i);
            for (std::uint32_t j = 0; j < i; ++j)
                preds[j] = j;
            std::shuffle(preds.begin(), preds.end(), rng);
            for (std::uint32_t j = 0; j < k; ++j)
                edges.insert({preds[j], i});
        }
    }

    std::vector<TaskId> tasks;
    for (std::uint32_t i = 0; i < n; ++i)
        tasks.push_back(b.task("t" + std::to_string(i)));
    std::vector<std::vector<FifoId>> inputs(n), outputs(n);
    std::vector<std::uint32_t> out_degree(n, 0);
    for (auto [src, dst] : edges)
        ++out_degree[src];
    for (auto [src, dst] : edges) {
        auto group = out_degree[src] > 1 ? group_label(spec, "t" + std::to_string(src) + "_out") : std::nullopt;
        FifoId f = b.fifo("t" + std::to_string(src) + "_to_t" + std::to_string(dst),
                          spec.widths[src % spec.widths.size()], std::move(group));
        outputs[src].push_back(f);
        inputs[dst].push_back(f);
    }
    // A bursting node emits every token on its first output before touching
    // the others, so reconvergent consumers need deep buffers on that path.
    std::vector<bool> burst(n, false);
    std::bernoulli_distribution coin(1.0 / 3.0);
    for (std::uint32_t i = 0; i < n; ++i)
        burst[i] = outputs[i].size() > 1 && coin(rng);

    for (std::uint32_t i = 0; i < n; ++i) {
        TaskId t = tasks[i];
        for (std::uint32_t k = 0; k < spec.tokens; ++k) {
            for (FifoId f : inputs[i])
                b.read(t, f);
            b.jitter(t);
            if (burst[i])
                b.write(t, outputs[i].front());
            else
                for (FifoId f : outputs[i])
                    b.write(t, f);
        }
        if (burst[i])
            for (std::size_t o = 1; o < outputs[i].size(); ++o)
                for (std::uint32_t k = 0; k < spec.tokens; ++k)
                    b.write(t, outputs[i][o]);
    }
    return b.finish();
}

} // namespace

const char* to_string(BenchPattern pattern) noexcept {
    switch (pattern) {
    case BenchPattern::Chain:
        return "chain";
    case BenchPattern::Tree:
        return "tree";
    case BenchPattern::WriteThenRead:
        return "wtr";
    case BenchPattern::Ring:
        return "ring";
    case BenchPattern::RandomDAG:
        return "dag";
    }
    return "unknown";
}

std::optional<BenchPattern> parse_pattern(std::string_view name) {
    for (auto p : {BenchPattern::Chain, BenchPattern::Tree, BenchPattern::WriteThenRead, BenchPattern::Ring,
                   BenchPattern::RandomDAG})
        if (name == to_string(p))
            return p;
    return std::nullopt;
}

TraceProgram generate(const BenchSpec& spec) {
    if (spec.stages == 0)
        throw std::invalid_argument("stages must be at least 1");
    if (spec.tokens == 0)
        throw std::invalid_argument("tokens must be at least 1");
    if (spec.widths.empty() || std::find(spec.widths.begin(), spec.widths.end(), 0u) != spec.widths.end())
        throw std::invalid_argument("widths must be non-empty and positive");
    if (spec.compute_jitter.first > spec.compute_jitter.second)
        throw std::invalid_argument("compute jitter range is inverted");
    if (spec.pattern == BenchPattern::WriteThenRead && spec.n == 0)
        throw std::invalid_argument("n must be at least 1");

    ProgramBuilder b(spec.name.empty() ? default_name(spec) : spec.name, spec.compute_jitter, spec.seed);
    switch (spec.pattern) {
    case BenchPattern::Chain:
        return make_chain(spec, b);
    case BenchPattern::Tree:
        return make_tree(spec, b);
    case BenchPattern::WriteThenRead:
        return make_write_then_read(spec, b);
    case BenchPattern::Ring:
        return make_ring(spec, b);
    case BenchPattern::RandomDAG:
        return make_random_dag(spec, b);
    }
    throw std::invalid_argument("unknown pattern");
}

std::vector<BenchSpec> default_suite() {
    std::vector<BenchSpec> suite;
    auto add = [&](BenchSpec s) {
        s.name = default_name(s);
        suite.push_back(std::move(s));
    };
    for (std::uint32_t n : {2u, 4u, 8u, 16u})
        add({.pattern = BenchPattern::WriteThenRead, .widths = {32}, .n = n});

    add({.pattern = BenchPattern::Chain, .stages = 3, .tokens = 4, .widths = {32}, .seed = 11});
    add({.pattern = BenchPattern::Chain, .stages = 8, .tokens = 64, .widths = {16, 32, 64}, .seed = 12});
    add({.pattern = BenchPattern::Chain, .stages = 16, .tokens = 256, .widths = {32}, .seed = 13});

    add({.pattern = BenchPattern::Tree, .stages = 2, .fanout = 2, .tokens = 64, .widths = {32}, .seed = 21});
    add({.pattern = BenchPattern::Tree, .stages = 3, .fanout = 2, .tokens = 128, .widths = {16, 32, 64}, .seed = 22});
    add({.pattern = BenchPattern::Tree, .stages = 2, .fanout = 4, .tokens = 128, .widths = {32}, .seed = 23});

    add({.pattern = BenchPattern::Ring, .stages = 3, .tokens = 8, .widths = {32}, .seed = 31});
    add({.pattern = BenchPattern::Ring, .stages = 5, .tokens = 32, .widths = {64}, .seed = 32});

    add({.pattern = BenchPattern::RandomDAG, .stages = 8, .fanout = 2, .tokens = 64, .widths = {16, 32, 64}, .seed = 41});
    add({.pattern = BenchPattern::RandomDAG, .stages = 16, .fanout = 3, .tokens = 128, .widths = {32, 64}, .seed = 42});
    add({.pattern = BenchPattern::RandomDAG,
         .stages = 60,
         .tokens = 512,
         .widths = {8, 16, 32, 64},
         .seed = 43,
         .edges = 100});
    return suite;
}

std::vector<std::filesystem::path> generate_suite(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& spec : default_suite()) {
        auto path = out_dir / (spec.name + ".trace");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        out << "# generated by fifo-advisor benchgen, suite version " << kSuiteVersion << "\n";
        out << serialize_trace(generate(spec));
        if (!out)
            throw std::runtime_error("failed writing " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace fifo_advisor
