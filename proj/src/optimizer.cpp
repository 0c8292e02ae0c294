#include "fifo_advisor/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "fifo_advisor/memory_model.hpp"

namespace fifo_advisor {

namespace {

// Independent, reproducible stream per (seed, stream index).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

unsigned resolve_jobs(unsigned jobs) {
    return jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    jobs = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned j = 0; j < jobs; ++j)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
}

SearchResult finish(std::vector<EvaluatedPoint> evaluations, std::vector<std::string> warnings) {
    SearchResult result;
    result.frontier = pareto_filter(evaluations);
    result.evaluations = std::move(evaluations);
    result.warnings = std::move(warnings);
    return result;
}

SearchResult sample_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode, bool grouped) {
    if (budget.max_evaluations == 0)
        throw std::invalid_argument("budget must allow at least one evaluation");
    SearchSpace space = make_search_space(program, grouped);
    const std::uint64_t space_size = space.size();
    const std::size_t nf = program.fifos.size();
    auto rng = make_rng(budget.seed, 0);

    std::vector<FifoConfig> configs{baseline_max(program)};
    std::set<FifoConfig> queued{configs.front()};
    std::set<std::vector<std::size_t>> drawn;
    const std::uint64_t max_draws = 20 * budget.max_evaluations;
    std::vector<std::size_t> indices(space.dimensions.size());
    for (std::uint64_t draw = 0; draw < max_draws && configs.size() < budget.max_evaluations && drawn.size() < space_size;
         ++draw) {
        for (std::size_t d = 0; d < indices.size(); ++d) {
            std::uniform_int_distribution<std::size_t> pick(0, space.dimensions[d].candidates.size() - 1);
            indices[d] = pick(rng);
        }
        if (!drawn.insert(indices).second)
            continue;
        FifoConfig config = space.config_for(indices, nf);
        if (queued.insert(config).second)
            configs.push_back(std::move(config));
    }

    CompiledTrace trace(program);
    auto sims = evaluate_many(trace, configs, mode, budget.jobs);
    std::vector<EvaluatedPoint> points;
    points.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i)
        points.push_back(make_point(program, configs[i], sims[i]));
    return finish(std::move(points), std::move(space.warnings));
}

struct ChainContext {
    const TraceProgram& program;
    const CompiledTrace& trace;
    const SearchSpace& space;
    const SearchBudget& budget;
    TimingMode mode;
    const EvaluatedPoint& anchor;
};

double objective(const EvaluatedPoint& p, const EvaluatedPoint& anchor, double beta, bool raw) {
    if (!p.feasible)
        return std::numeric_limits<double>::infinity();
    double lat = static_cast<double>(p.latency);
    double bram = static_cast<double>(p.bram);
    if (!raw) {
        lat /= std::max(1.0, static_cast<double>(anchor.latency));
        bram /= std::max(1.0, static_cast<double>(anchor.bram));
    }
    return (1.0 - beta) * lat + beta * bram;
}

std::vector<EvaluatedPoint> anneal_chain(const ChainContext& ctx, std::size_t chain, double beta,
                                         std::uint64_t sim_budget) {
    auto rng = make_rng(ctx.budget.seed, chain + 1);
    const std::size_t nf = ctx.program.fifos.size();
    const auto& dims = ctx.space.dimensions;
    std::vector<EvaluatedPoint> log;
    std::map<std::vector<std::size_t>, EvaluatedPoint> cache;

    auto lookup = [&](const std::vector<std::size_t>& idx) -> const EvaluatedPoint* {
        if (auto it = cache.find(idx); it != cache.end())
            return &it->second;
        FifoConfig config = ctx.space.config_for(idx, nf);
        if (config == ctx.anchor.config)
            return &cache.emplace(idx, ctx.anchor).first->second;
        if (log.size() >= sim_budget)
            return nullptr;
        log.push_back(make_point(ctx.program, config, ctx.trace.simulate(config, ctx.mode)));
        return &cache.emplace(idx, log.back()).first->second;
    };

    std::vector<std::size_t> current(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d)
        current[d] = dims[d].candidates.size() - 1;
    const EvaluatedPoint* start = lookup(current);
    if (!start)
        return log;
    double current_cost = objective(*start, ctx.anchor, beta, ctx.budget.raw_scalarization);

    std::vector<std::size_t> movable;
    for (std::size_t d = 0; d < dims.size(); ++d)
        if (dims[d].candidates.size() > 1)
            movable.push_back(d);
    if (movable.empty())
        return log;

    const auto& schedule = ctx.budget.schedule;
    double temperature = schedule.initial_temperature;
    std::uniform_int_distribution<std::size_t> pick_dim(0, movable.size() - 1);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t max_steps = 50 * std::max<std::uint64_t>(1, sim_budget);

    for (std::uint64_t step = 1; step <= max_steps && log.size() < sim_budget; ++step) {
        const std::size_t d = movable[pick_dim(rng)];
        std::vector<std::size_t> next = current;
        if (coin(rng))
            next[d] = std::min(next[d] + 1, dims[d].candidates.size() - 1);
        else if (next[d] > 0)
            --next[d];

        const EvaluatedPoint* point = lookup(next);
        if (!point)
            break;
        const double cost = objective(*point, ctx.anchor, beta, ctx.budget.raw_scalarization);
        const double u = unit(rng);
        if (point->feasible) {
            const double delta = cost - current_cost;
            if (delta <= 0.0 || (temperature > 0.0 && u < std::exp(-delta / temperature))) {
                current = std::move(next);
                current_cost = cost;
            }
        }
        if (schedule.steps_per_temperature && step % schedule.steps_per_temperature == 0)
            temperature *= schedule.cooling;
    }
    return log;
}

SearchResult anneal_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode, bool grouped) {
    if (budget.max_evaluations == 0)
        throw std::invalid_argument("budget must allow at least one evaluation");
    if (budget.beta_count == 0 || budget.beta_count > budget.max_evaluations)
        throw std::invalid_argument("beta count must be in [1, max_evaluations]");
    SearchSpace space = make_search_space(program, grouped);
    CompiledTrace trace(program);
    const FifoConfig bmax = baseline_max(program);
    const EvaluatedPoint anchor = make_point(program, bmax, trace.simulate(bmax, mode));

    const auto betas = beta_grid(budget.beta_count);
    const std::uint64_t per_chain = budget.max_evaluations / betas.size();
    ChainContext ctx{program, trace, space, budget, mode, anchor};
    std::vector<std::vector<EvaluatedPoint>> logs(betas.size());
    // The anchor evaluation is charged to the first chain.
    parallel_for(betas.size(), budget.jobs,
                 [&](std::size_t k) { logs[k] = anneal_chain(ctx, k, betas[k], per_chain - (k == 0 ? 1 : 0)); });

    std::vector<EvaluatedPoint> pooled{anchor};
    for (auto& log : logs)
        pooled.insert(pooled.end(), std::make_move_iterator(log.begin()), std::make_move_iterator(log.end()));
    return finish(std::move(pooled), std::move(space.warnings));
}

} // namespace

const char* to_string(OptimizerKind kind) noexcept {
    switch (kind) {
    case OptimizerKind::Random:
        return "random";
    case OptimizerKind::GroupedRandom:
        return "grouped-random";
    case OptimizerKind::Annealing:
        return "sa";
    case OptimizerKind::GroupedAnnealing:
        return "grouped-sa";
    case OptimizerKind::Greedy:
        return "greedy";
    }
    return "unknown";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
    for (auto kind : kAllOptimizers)
        if (name == to_string(kind))
            return kind;
    return std::nullopt;
}

std::uint64_t SearchSpace::size() const noexcept {
    std::uint64_t total = 1;
    for (const auto& d : dimensions) {
        const std::uint64_t n = d.candidates.size();
        if (total > std::numeric_limits<std::uint64_t>::max() / n)
            return std::numeric_limits<std::uint64_t>::max();
        total *= n;
    }
    return total;
}

FifoConfig SearchSpace::config_for(const std::vector<std::size_t>& indices, std::size_t fifo_count) const {
    FifoConfig config{std::vector<Depth>(fifo_count, 2)};
    for (std::size_t d = 0; d < dimensions.size(); ++d)
        for (FifoId f : dimensions[d].members)
            config.depths[f] = dimensions[d].candidates.at(indices.at(d));
    return config;
}

SearchSpace make_search_space(const TraceProgram& program, bool grouped) {
    SearchSpace space;
    const auto bounds = upper_bounds(program);
    auto single = [&](FifoId f) {
        return SearchDimension{{f}, breakpoints(program.fifos[f].bitwidth, bounds[f])};
    };
    if (!grouped) {
        for (FifoId f = 0; f < program.fifos.size(); ++f)
            space.dimensions.push_back(single(f));
        return space;
    }
    for (const auto& cell : fifo_groups(program)) {
        const auto width = program.fifos[cell.front()].bitwidth;
        const bool uniform = std::all_of(cell.begin(), cell.end(),
                                         [&](FifoId f) { return program.fifos[f].bitwidth == width; });
        if (cell.size() == 1 || !uniform) {
            if (!uniform)
                space.warnings.push_back("group '" + *program.fifos[cell.front()].group +
                                         "' mixes bit widths; sampling its fifos individually");
            for (FifoId f : cell)
                space.dimensions.push_back(single(f));
            continue;
        }
        Depth upper = bounds[cell.front()];
        for (FifoId f : cell)
            upper = std::min(upper, bounds[f]);
        space.dimensions.push_back({cell, breakpoints(width, upper)});
    }
    return space;
}

FifoConfig baseline_max(const TraceProgram& program) {
    return FifoConfig{upper_bounds(program)};
}

FifoConfig baseline_min(const TraceProgram& program) {
    return FifoConfig{std::vector<Depth>(program.fifos.size(), 2)};
}

EvaluatedPoint make_point(const TraceProgram& program, const FifoConfig& config, const SimResult& result) {
    EvaluatedPoint p;
    p.config = config;
    p.feasible = !result.deadlocked;
    p.latency = p.feasible ? result.latency : kInfiniteLatency;
    p.bram = config_bram_count(program, config);
    return p;
}

EvaluatedPoint evaluate_point(const TraceProgram& program, const FifoConfig& config, TimingMode mode) {
    return make_point(program, config, simulate(program, config, mode));
}

bool dominates(const EvaluatedPoint& a, const EvaluatedPoint& b) noexcept {
    return a.latency <= b.latency && a.bram <= b.bram && (a.latency < b.latency || a.bram < b.bram);
}

ParetoFrontier pareto_filter(const std::vector<EvaluatedPoint>& points) {
    std::vector<const EvaluatedPoint*> feasible;
    for (const auto& p : points)
        if (p.feasible)
            feasible.push_back(&p);
    std::stable_sort(feasible.begin(), feasible.end(), [](const EvaluatedPoint* a, const EvaluatedPoint* b) {
        return a->latency != b->latency ? a->latency < b->latency : a->bram < b->bram;
    });
    ParetoFrontier frontier;
    for (const auto* p : feasible)
        if (frontier.points.empty() || p->bram < frontier.points.back().bram)
            frontier.points.push_back(*p);
    return frontier;
}

SearchResult random_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode) {
    return sample_search(program, budget, mode, false);
}

SearchResult grouped_random_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode) {
    return sample_search(program, budget, mode, true);
}

SearchResult simulated_annealing(const TraceProgram& program, const SearchBudget& budget, TimingMode mode) {
    return anneal_search(program, budget, mode, false);
}

SearchResult grouped_simulated_annealing(const TraceProgram& program, const SearchBudget& budget, TimingMode mode) {
    return anneal_search(program, budget, mode, true);
}

SearchResult greedy_search(const TraceProgram& program, const SearchBudget& budget, TimingMode mode) {
    if (budget.max_evaluations == 0)
        throw std::invalid_argument("budget must allow at least one evaluation");
    if (budget.epsilon < 0.0)
        throw std::invalid_argument("epsilon must be non-negative");
    CompiledTrace trace(program);
    const auto candidates = program_breakpoints(program);
    FifoConfig current = baseline_max(program);
    const SimResult base = trace.simulate(current, mode);
    std::vector<EvaluatedPoint> log{make_point(program, current, base)};
    if (base.deadlocked)
        return finish(std::move(log), {"Baseline-Max deadlocks; greedy reduction skipped"});

    const double limit = (1.0 + budget.epsilon) * static_cast<double>(base.latency);
    std::vector<FifoId> order(program.fifos.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](FifoId a, FifoId b) {
        return base.peak_occupancy[a] > base.peak_occupancy[b];
    });

    for (FifoId f : order) {
        if (log.size() >= budget.max_evaluations)
            break;
        const Depth smallest = candidates[f].front();
        if (smallest >= current.depths[f])
            continue;
        FifoConfig trial = current;
        trial.depths[f] = smallest;
        const SimResult r = trace.simulate(trial, mode);
        log.push_back(make_point(program, trial, r));
        if (!r.deadlocked && static_cast<double>(r.latency) <= limit)
            current = std::move(trial);
    }
    return finish(std::move(log), {});
}

SearchResult run_optimizer(OptimizerKind kind, const TraceProgram& program, const SearchBudget& budget,
                           TimingMode mode) {
    switch (kind) {
    case OptimizerKind::Random:
        return random_search(program, budget, mode);
    case OptimizerKind::GroupedRandom:
        return grouped_random_search(program, budget, mode);
    case OptimizerKind::Annealing:
        return simulated_annealing(program, budget, mode);
    case OptimizerKind::GroupedAnnealing:
        return grouped_simulated_annealing(program, budget, mode);
    case OptimizerKind::Greedy:
        return greedy_search(program, budget, mode);
    }
    throw std::invalid_argument("unknown optimizer");
}

std::vector<double> beta_grid(unsigned count) {
    if (count == 0)
        throw std::invalid_argument("beta count must be positive");
    if (count == 1)
        return {0.5};
    std::vector<double> out(count);
    for (unsigned k = 0; k < count; ++k)
        out[k] = static_cast<double>(k) / static_cast<double>(count - 1);
    return out;
}

namespace {

double ratio(std::uint64_t value, std::uint64_t base) {
    if (base == 0)
        return value == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(value) / static_cast<double>(base);
}

} // namespace

double score(const EvaluatedPoint& point, const EvaluatedPoint& baseline, double alpha) {
    if (!point.feasible || !baseline.feasible)
        throw std::invalid_argument("score requires feasible point and baseline");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must be in [0, 1]");
    const double lat = ratio(point.latency, baseline.latency);
    const double bram = ratio(point.bram, baseline.bram);
    // Keep 0 * inf out of the sum when one weight is zero.
    double s = 0.0;
    if (alpha > 0.0)
        s += alpha * lat;
    if (alpha < 1.0)
        s += (1.0 - alpha) * bram;
    return s;
}

EvaluatedPoint highlight(const ParetoFrontier& frontier, const EvaluatedPoint& baseline, double alpha) {
    if (frontier.points.empty())
        throw std::invalid_argument("highlight: empty frontier");
    const EvaluatedPoint* best = nullptr;
    double best_score = 0.0;
    for (const auto& p : frontier.points) {
        const double s = score(p, baseline, alpha);
        const bool better = !best || s < best_score ||
                            (s == best_score && (p.latency < best->latency ||
                                                 (p.latency == best->latency && p.bram < best->bram)));
        if (better) {
            best = &p;
            best_score = s;
        }
    }
    return *best;
}

double hypervolume(const ParetoFrontier& frontier, double ref_latency, double ref_bram) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : frontier.points)
        if (p.feasible && static_cast<double>(p.latency) < ref_latency && static_cast<double>(p.bram) < ref_bram)
            pts.emplace_back(static_cast<double>(p.latency), static_cast<double>(p.bram));
    std::sort(pts.begin(), pts.end());
    double volume = 0.0;
    double best_bram = ref_bram;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        best_bram = std::min(best_bram, pts[i].second);
        const double next_lat = i + 1 < pts.size() ? pts[i + 1].first : ref_latency;
        volume += (next_lat - pts[i].first) * (ref_bram - best_bram);
    }
    return volume;
}

} // namespace fifo_advisor
