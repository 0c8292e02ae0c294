#include <doctest.h>

#include <sstream>

#include "fifo_advisor/benchgen.hpp"
#include "fifo_advisor/report.hpp"

using namespace fifo_advisor;

namespace {

TraceProgram fig2() {
    BenchSpec spec;
    spec.pattern = BenchPattern::WriteThenRead;
    spec.n = 8;
    return generate(spec);
}

} // namespace

TEST_CASE("config json round trip") {
    auto p = fig2();
    FifoConfig c{{7, 3}};
    auto text = config_json(p, c).dump();
    CHECK(text == R"({"depths":{"x":7,"y":3}})");
    CHECK(parse_config_json(p, text) == c);
}

TEST_CASE("config json errors") {
    auto p = fig2();
    CHECK_THROWS_AS(parse_config_json(p, "{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_json(p, R"({"depths":{"x":7}})"), TraceValidationError);
    CHECK_THROWS_AS(parse_config_json(p, R"({"depths":{"x":7,"y":2,"z":3}})"), TraceValidationError);
    CHECK_THROWS_AS(parse_config_json(p, R"({"depths":{"x":"7","y":2}})"), TraceValidationError);
    CHECK_THROWS_AS(parse_config_json(p, R"({"depths":{"x":-1,"y":2}})"), TraceValidationError);
    CHECK_THROWS_AS(parse_config_json(p, R"([1,2])"), std::invalid_argument);
}

TEST_CASE("simulation report carries the deadlock chain") {
    auto p = fig2();
    FifoConfig c{{2, 2}};
    auto j = sim_result_json(p, c, simulate(p, c), TimingMode::Uniform);
    CHECK(j["deadlocked"] == true);
    CHECK(j["deadlock"]["cyclic"] == true);
    CHECK(j["deadlock"]["description"] == "producer -(x, full)-> consumer -(y, empty)-> producer");
}

TEST_CASE("point json marks infeasible baselines") {
    auto p = fig2();
    auto bmax = evaluate_point(p, baseline_max(p));
    auto bmin = evaluate_point(p, baseline_min(p));
    auto j = point_json(p, bmax, bmax, bmin, 0.7);
    // Baseline-Max uses no BRAM here, so only the latency term contributes.
    CHECK(bmax.bram == 0);
    CHECK(j["score_vs_baseline_max"] == 0.7);
    CHECK(j["score_vs_baseline_min"].is_null());
}

TEST_CASE("evaluation csv") {
    auto p = fig2();
    SearchResult r;
    r.evaluations = {evaluate_point(p, {{8, 8}}), evaluate_point(p, {{2, 2}})};
    std::ostringstream out;
    write_evaluation_csv(out, p, {{"greedy", &r}});
    auto lat = std::to_string(r.evaluations[0].latency);
    CHECK(out.str() == "optimizer,index,feasible,latency,bram,x,y\n"
                       "greedy,0,1," + lat + ",0,8,8\n"
                       "greedy,1,0,,0,2,2\n");
}
