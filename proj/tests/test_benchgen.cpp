#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fifo_advisor/benchgen.hpp"
#include "fifo_advisor/optimizer.hpp"
#include "fifo_advisor/simulator.hpp"

using namespace fifo_advisor;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("write-then-read structure") {
    BenchSpec spec;
    spec.pattern = BenchPattern::WriteThenRead;
    spec.n = 8;
    auto p = generate(spec);
    REQUIRE(p.task_count() == 2);
    REQUIRE(p.fifo_count() == 2);
    auto counts = channel_counts(p);
    CHECK(counts.writes == std::vector<std::uint64_t>{8, 8});
    CHECK(counts.reads == std::vector<std::uint64_t>{8, 8});
    // Producer: all x then all y. Consumer: x, y alternating.
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(std::get<Write>(p.tasks[0].events[i]).fifo == (i < 8 ? 0u : 1u));
        CHECK(std::get<Read>(p.tasks[1].events[i]).fifo == i % 2);
    }
    // Token-count oracle: producer must park x[0..n-2] before the first y write
    // can unblock the consumer, so x needs n-1 slots.
    CHECK_FALSE(simulate(p, {{7, 2}}).deadlocked);
    CHECK(simulate(p, {{6, 2}}).deadlocked);
}

TEST_CASE("small chain") {
    BenchSpec spec;
    spec.pattern = BenchPattern::Chain;
    spec.stages = 3;
    spec.tokens = 4;
    auto p = generate(spec);
    CHECK(p.task_count() == 3);
    REQUIRE(p.fifo_count() == 2);
    auto counts = channel_counts(p);
    CHECK(counts.writes == std::vector<std::uint64_t>{4, 4});
    CHECK(counts.reads == std::vector<std::uint64_t>{4, 4});
    CHECK_FALSE(simulate(p, baseline_min(p)).deadlocked);
}

TEST_CASE("tree groups per level") {
    BenchSpec spec;
    spec.pattern = BenchPattern::Tree;
    spec.stages = 2;
    spec.fanout = 2;
    auto p = generate(spec);
    CHECK(p.task_count() == 7);
    CHECK(p.fifo_count() == 6);
    auto cells = fifo_groups(p);
    CHECK(cells.size() == 2);
    for (const auto& cell : cells) {
        const auto& label = p.fifos[cell.front()].group;
        REQUIRE(label);
        for (FifoId f : cell)
            CHECK(p.fifos[f].group == label);
    }
    spec.grouping = false;
    CHECK(fifo_groups(generate(spec)).size() == 6);
}

TEST_CASE("generation is deterministic and validates specs") {
    BenchSpec spec;
    spec.pattern = BenchPattern::RandomDAG;
    spec.stages = 12;
    spec.seed = 77;
    CHECK(generate(spec) == generate(spec));
    spec.seed = 78;
    CHECK_FALSE(generate(spec) == generate(BenchSpec{.pattern = BenchPattern::RandomDAG, .stages = 12, .seed = 77}));

    CHECK_THROWS_AS(generate(BenchSpec{.stages = 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate(BenchSpec{.tokens = 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate(BenchSpec{.widths = {}}), std::invalid_argument);
    CHECK_THROWS_AS(generate(BenchSpec{.compute_jitter = {3, 1}}), std::invalid_argument);
    CHECK(parse_pattern("dag") == BenchPattern::RandomDAG);
    CHECK_FALSE(parse_pattern("mesh"));
}

TEST_CASE("ring deadlocks below full buffering") {
    BenchSpec spec;
    spec.pattern = BenchPattern::Ring;
    spec.stages = 5;
    spec.tokens = 6;
    auto p = generate(spec);
    auto r = simulate(p, baseline_min(p));
    REQUIRE(r.deadlocked);
    auto chain = detect_deadlock_cycle(r, p);
    CHECK(chain.cyclic);
    CHECK(chain.edges.size() == 5);
    CHECK_FALSE(simulate(p, baseline_max(p)).deadlocked);
}

TEST_CASE("default suite") {
    auto suite = default_suite();
    CHECK(suite.size() >= 12);
    bool has_big = false;
    for (const auto& spec : suite) {
        CAPTURE(spec.name);
        auto p = generate(spec);
        CHECK(p.name == spec.name);
        CHECK_FALSE(simulate(p, baseline_max(p)).deadlocked);
        if (p.fifo_count() == 100 && event_count(p) >= 100000)
            has_big = true;
    }
    CHECK(has_big);

    auto dir = std::filesystem::temp_directory_path() / "fifo_advisor_suite_test";
    std::filesystem::remove_all(dir);
    auto first = generate_suite(dir / "a");
    auto second = generate_suite(dir / "b");
    REQUIRE(first.size() == suite.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        auto text = slurp(first[i]);
        CHECK(text == slurp(second[i]));
        CHECK_NOTHROW(parse_trace(text));
    }
    std::filesystem::remove_all(dir);
}
