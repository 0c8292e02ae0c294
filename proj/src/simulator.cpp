#include "fifo_advisor/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fifo_advisor/memory_model.hpp"

namespace fifo_advisor {

namespace {

constexpr Cycles kUnknown = std::numeric_limits<Cycles>::max();
constexpr std::uint64_t kNotWaiting = std::numeric_limits<std::uint64_t>::max();

enum class TaskState : std::uint8_t { Running, Blocked, Done };

// Scratch buffers reused across simulations on the same thread.
struct Workspace {
    std::vector<Cycles> write_time;
    std::vector<Cycles> read_time;
    std::vector<std::size_t> pc;
    std::vector<Cycles> now;
    std::vector<TaskState> state;
    std::vector<std::uint64_t> writer_wait;
    std::vector<std::uint64_t> reader_wait;
    std::vector<TaskId> ready;
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

} // namespace

const char* to_string(TimingMode mode) noexcept {
    return mode == TimingMode::Uniform ? "uniform" : "depth-aware";
}

const char* to_string(BlockKind kind) noexcept {
    return kind == BlockKind::Full ? "full" : "empty";
}

std::vector<std::uint32_t> read_latencies(const TraceProgram& program, const FifoConfig& config, TimingMode mode) {
    std::vector<std::uint32_t> out(program.fifos.size(), 1);
    if (mode == TimingMode::DepthAware)
        for (std::size_t i = 0; i < out.size(); ++i)
            if (!is_shift_register(config.depths[i], program.fifos[i].bitwidth))
                out[i] = 2;
    return out;
}

void check_simulation_config(const TraceProgram& program, const FifoConfig& config) {
    if (config.depths.size() != program.fifos.size())
        throw std::invalid_argument("config has " + std::to_string(config.depths.size()) + " depths but program has " +
                                    std::to_string(program.fifos.size()) + " fifos");
    for (std::size_t i = 0; i < config.depths.size(); ++i)
        if (config.depths[i] == 0)
            throw std::invalid_argument("fifo '" + program.fifos[i].name + "' has depth 0");
}

CompiledTrace::CompiledTrace(const TraceProgram& program) : program_(&program) {
    const std::size_t nf = program.fifos.size();
    const std::size_t nt = program.tasks.size();
    writes_.assign(nf, 0);
    reads_.assign(nf, 0);
    producer_.assign(nf, 0);
    consumer_.assign(nf, 0);
    task_begin_.reserve(nt + 1);
    tail_delay_.reserve(nt);

    for (const auto& task : program.tasks) {
        task_begin_.push_back(ops_.size());
        Cycles pending = 0;
        for (const auto& ev : task.events) {
            if (auto* c = std::get_if<Compute>(&ev)) {
                pending += c->cycles;
                continue;
            }
            Op op{};
            op.delay = pending;
            pending = 0;
            if (auto* r = std::get_if<Read>(&ev)) {
                op.fifo = r->fifo;
                op.write = false;
                op.token = static_cast<std::uint32_t>(reads_.at(op.fifo)++);
                consumer_[op.fifo] = task.id;
            } else {
                op.fifo = std::get<Write>(ev).fifo;
                op.write = true;
                op.token = static_cast<std::uint32_t>(writes_.at(op.fifo)++);
                producer_[op.fifo] = task.id;
            }
            ops_.push_back(op);
        }
        tail_delay_.push_back(pending);
    }
    task_begin_.push_back(ops_.size());

    write_offset_.resize(nf + 1);
    read_offset_.resize(nf + 1);
    write_offset_[0] = read_offset_[0] = 0;
    for (std::size_t i = 0; i < nf; ++i) {
        write_offset_[i + 1] = write_offset_[i] + writes_[i];
        read_offset_[i + 1] = read_offset_[i] + reads_[i];
    }
}

SimResult CompiledTrace::simulate(const FifoConfig& config, TimingMode mode) const {
    const TraceProgram& program = *program_;
    check_simulation_config(program, config);
    const std::size_t nf = program.fifos.size();
    const std::size_t nt = program.tasks.size();
    const auto latency_of = read_latencies(program, config, mode);
    const auto& depth = config.depths;

    Workspace& ws = workspace();
    ws.write_time.assign(write_offset_[nf], kUnknown);
    ws.read_time.assign(read_offset_[nf], kUnknown);
    ws.pc.assign(nt, 0);
    ws.now.assign(nt, 0);
    ws.state.assign(nt, TaskState::Running);
    ws.writer_wait.assign(nf, kNotWaiting);
    ws.reader_wait.assign(nf, kNotWaiting);
    ws.ready.clear();

    SimResult result;
    result.stall_cycles.assign(nf, 0);

    for (TaskId t = 0; t < nt; ++t) {
        ws.pc[t] = task_begin_[t];
        ws.now[t] = task_begin_[t] < task_begin_[t + 1] ? ops_[task_begin_[t]].delay : tail_delay_[t];
    }
    for (TaskId t = static_cast<TaskId>(nt); t-- > 0;)
        ws.ready.push_back(t);

    while (!ws.ready.empty()) {
        const TaskId task = ws.ready.back();
        ws.ready.pop_back();
        ws.state[task] = TaskState::Running;
        std::size_t pc = ws.pc[task];
        const std::size_t end = task_begin_[task + 1];
        Cycles now = ws.now[task];

        while (pc < end) {
            const Op& op = ops_[pc];
            const FifoId f = op.fifo;
            Cycles done;
            if (op.write) {
                done = now;
                if (op.token >= depth[f]) {
                    const std::uint64_t need = op.token - depth[f];
                    // A read that never happens leaves the writer blocked for good.
                    const Cycles freed = need < reads_[f] ? ws.read_time[read_offset_[f] + need] : kUnknown;
                    if (freed == kUnknown) {
                        ws.writer_wait[f] = need;
                        break;
                    }
                    done = std::max(now, freed + 1);
                }
                ws.write_time[write_offset_[f] + op.token] = done;
                if (ws.reader_wait[f] == op.token) {
                    ws.reader_wait[f] = kNotWaiting;
                    ws.ready.push_back(consumer_[f]);
                }
            } else {
                const Cycles written = ws.write_time[write_offset_[f] + op.token];
                if (written == kUnknown) {
                    ws.reader_wait[f] = op.token;
                    break;
                }
                done = std::max(now, written + latency_of[f]);
                ws.read_time[read_offset_[f] + op.token] = done;
                if (ws.writer_wait[f] == op.token) {
                    ws.writer_wait[f] = kNotWaiting;
                    ws.ready.push_back(producer_[f]);
                }
            }
            result.stall_cycles[f] += done - now;
            now = done + 1;
            ++pc;
            now += pc < end ? ops_[pc].delay : tail_delay_[task];
        }

        ws.pc[task] = pc;
        ws.now[task] = now;
        ws.state[task] = pc < end ? TaskState::Blocked : TaskState::Done;
    }

    Cycles latency = 0;
    for (TaskId t = 0; t < nt; ++t)
        latency = std::max(latency, ws.now[t]);
    result.latency = latency;

    for (TaskId t = 0; t < nt; ++t) {
        if (ws.state[t] != TaskState::Blocked)
            continue;
        if (!result.deadlock)
            result.deadlock.emplace().cycle = latency;
        const Op& op = ops_[ws.pc[t]];
        result.deadlock->blocked.push_back({t, op.fifo, op.write ? BlockKind::Full : BlockKind::Empty});
        result.stall_cycles[op.fifo] += latency - ws.now[t];
    }
    result.deadlocked = result.deadlock.has_value();

    result.peak_occupancy.assign(nf, 0);
    result.tokens_read.assign(nf, 0);
    for (FifoId f = 0; f < nf; ++f) {
        const Cycles* w = ws.write_time.data() + write_offset_[f];
        const Cycles* r = ws.read_time.data() + read_offset_[f];
        std::uint64_t nread = 0;
        while (nread < reads_[f] && r[nread] != kUnknown)
            ++nread;
        result.tokens_read[f] = nread;
        std::uint64_t freed = 0, peak = 0;
        for (std::uint64_t k = 0; k < writes_[f] && w[k] != kUnknown; ++k) {
            while (freed < nread && r[freed] < w[k])
                ++freed;
            peak = std::max(peak, k + 1 - freed);
        }
        result.peak_occupancy[f] = peak;
    }
    return result;
}

SimResult simulate(const TraceProgram& program, const FifoConfig& config, TimingMode mode) {
    return CompiledTrace(program).simulate(config, mode);
}

std::vector<SimResult> evaluate_many(const CompiledTrace& trace, std::span<const FifoConfig> configs, TimingMode mode,
                                     unsigned jobs) {
    for (const auto& c : configs)
        check_simulation_config(trace.program(), c);
    std::vector<SimResult> results(configs.size());
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, configs.size()));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i)
            results[i] = trace.simulate(configs[i], mode);
        return results;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (unsigned j = 0; j < jobs; ++j)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < configs.size(); i = next++)
                    results[i] = trace.simulate(configs[i], mode);
            });
    }
    return results;
}

std::vector<SimResult> evaluate_many(const TraceProgram& program, std::span<const FifoConfig> configs, TimingMode mode,
                                     unsigned jobs) {
    return evaluate_many(CompiledTrace(program), configs, mode, jobs);
}

WaitForChain detect_deadlock_cycle(const SimResult& result, const TraceProgram& program) {
    if (!result.deadlocked || !result.deadlock)
        throw std::logic_error("detect_deadlock_cycle: simulation did not deadlock");
    const auto& blocked = result.deadlock->blocked;
    const std::size_t nt = program.tasks.size();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    // Each blocked task waits on exactly one other task: the consumer of a
    // full fifo or the producer of an empty one.
    std::vector<std::size_t> edge_of(nt, kNone);
    for (std::size_t i = 0; i < blocked.size(); ++i)
        edge_of[blocked[i].task] = i;
    auto waits_on = [&](const WaitEdge& e) -> std::optional<TaskId> {
        const auto& f = program.fifos.at(e.fifo);
        return e.kind == BlockKind::Full ? f.consumer_task : f.producer_task;
    };

    std::vector<std::uint8_t> color(nt, 0); // 0 unseen, 1 on current walk, 2 finished
    for (const auto& start : blocked) {
        if (color[start.task])
            continue;
        std::vector<TaskId> walk;
        std::optional<TaskId> cur = start.task;
        while (cur && edge_of[*cur] != kNone && color[*cur] == 0) {
            color[*cur] = 1;
            walk.push_back(*cur);
            cur = waits_on(blocked[edge_of[*cur]]);
        }
        if (cur && edge_of[*cur] != kNone && color[*cur] == 1) {
            auto first = std::find(walk.begin(), walk.end(), *cur);
            std::vector<TaskId> cycle(first, walk.end());
            std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
            WaitForChain chain{{}, true};
            for (TaskId t : cycle)
                chain.edges.push_back(blocked[edge_of[t]]);
            return chain;
        }
        for (TaskId t : walk)
            color[t] = 2;
    }
    return WaitForChain{blocked, false};
}

std::string describe(const WaitForChain& chain, const TraceProgram& program) {
    std::ostringstream os;
    for (std::size_t i = 0; i < chain.edges.size(); ++i) {
        const auto& e = chain.edges[i];
        const auto& f = program.fifos.at(e.fifo);
        os << program.tasks.at(e.task).name << " -(" << f.name << ", " << to_string(e.kind) << ")-> ";
        auto target = e.kind == BlockKind::Full ? f.consumer_task : f.producer_task;
        if (!chain.cyclic || i + 1 == chain.edges.size())
            os << (target ? program.tasks.at(*target).name : std::string("<none>"));
        if (!chain.cyclic && i + 1 < chain.edges.size())
            os << "; ";
    }
    return os.str();
}

} // namespace fifo_advisor
