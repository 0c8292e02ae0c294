#include "fifo_advisor/trace.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>

namespace fifo_advisor {

namespace {

std::string position_message(std::size_t line, std::size_t column, const std::string& message) {
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << message;
    return os.str();
}

std::string join_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    std::ostringstream os;
    for (std::size_t i = 0; i < diagnostics.size(); ++i) {
        if (i)
            os << "; ";
        if (diagnostics[i].line)
            os << "line " << diagnostics[i].line << ": ";
        os << diagnostics[i].message;
    }
    return os.str();
}

struct Token {
    std::string_view text;
    std::size_t column; // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        if (i >= line.size() || line[i] == '#')
            break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#')
            ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

class LineParser {
public:
    LineParser(std::size_t line_no, std::vector<Token> tokens)
        : line_(line_no), tokens_(std::move(tokens)) {}

    [[noreturn]] void fail(const Token& tok, const std::string& message) const {
        throw TraceSyntaxError(line_, tok.column, message);
    }

    [[noreturn]] void fail_end(const std::string& message) const {
        std::size_t col = tokens_.empty() ? 1 : tokens_.back().column + tokens_.back().text.size();
        throw TraceSyntaxError(line_, col, message);
    }

    const Token& at(std::size_t i, const char* what) const {
        if (i >= tokens_.size())
            fail_end(std::string("expected ") + what);
        return tokens_[i];
    }

    template <typename Int>
    Int number(const Token& tok, const char* what) const {
        return number_of<Int>(tok, tok.text, what);
    }

    template <typename Int>
    Int number_of(const Token& tok, std::string_view text, const char* what) const {
        Int value{};
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
            fail(tok, std::string("invalid ") + what + " '" + std::string(text) + "'");
        return value;
    }

    void expect_arity(std::size_t n) const {
        if (tokens_.size() > n)
            fail(tokens_[n], "unexpected token '" + std::string(tokens_[n].text) + "'");
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
    std::vector<Token> tokens_;
};

} // namespace

TraceSyntaxError::TraceSyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(position_message(line, column, message)), line_(line), column_(column) {}

TraceValidationError::TraceValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

TraceProgram parse_trace(std::string_view text) {
    TraceProgram program;
    std::map<std::uint64_t, FifoDecl> fifos;
    std::map<std::uint64_t, TaskTrace> tasks;
    std::vector<Diagnostic> semantic;

    bool seen_header = false;
    bool seen_program = false;
    TaskTrace* current = nullptr;
    std::size_t task_line = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        LineParser lp(line_no, tokenize(raw));
        if (lp.size() == 0)
            continue;
        const Token& head = lp.at(0, "statement");

        if (!seen_header) {
            if (head.text != "trace-format")
                lp.fail(head, "expected 'trace-format 1' header");
            auto version = lp.number<unsigned>(lp.at(1, "format version"), "format version");
            if (version != 1)
                lp.fail(lp.at(1, "format version"), "unsupported trace format version " + std::to_string(version));
            lp.expect_arity(2);
            seen_header = true;
            continue;
        }

        if (current) {
            if (head.text == "end") {
                lp.expect_arity(1);
                current = nullptr;
                continue;
            }
            if (head.text == "c") {
                auto cycles = lp.number<std::uint64_t>(lp.at(1, "cycle count"), "cycle count");
                lp.expect_arity(2);
                current->events.emplace_back(Compute{cycles});
                continue;
            }
            if (head.text == "r" || head.text == "w") {
                const Token& id_tok = lp.at(1, "fifo id");
                auto id = lp.number<std::uint32_t>(id_tok, "fifo id");
                lp.expect_arity(2);
                if (head.text == "r")
                    current->events.emplace_back(Read{id});
                else
                    current->events.emplace_back(Write{id});
                continue;
            }
            lp.fail(head, "unknown task statement '" + std::string(head.text) + "'");
        }

        if (head.text == "program") {
            if (seen_program)
                lp.fail(head, "duplicate 'program' statement");
            program.name = std::string(lp.at(1, "program name").text);
            lp.expect_arity(2);
            seen_program = true;
        } else if (head.text == "fifo") {
            const Token& id_tok = lp.at(1, "fifo id");
            auto id = lp.number<std::uint32_t>(id_tok, "fifo id");
            FifoDecl decl;
            decl.id = id;
            decl.name = std::string(lp.at(2, "fifo name").text);
            bool has_width = false;
            for (std::size_t i = 3; i < lp.size(); ++i) {
                const Token& attr = lp.at(i, "attribute");
                auto eq = attr.text.find('=');
                if (eq == std::string_view::npos)
                    lp.fail(attr, "expected key=value attribute, got '" + std::string(attr.text) + "'");
                auto key = attr.text.substr(0, eq);
                auto value = attr.text.substr(eq + 1);
                if (key == "width") {
                    decl.bitwidth = lp.number_of<std::uint32_t>(attr, value, "width");
                    if (decl.bitwidth == 0)
                        lp.fail(attr, "width must be at least 1");
                    has_width = true;
                } else if (key == "depth") {
                    decl.declared_depth = lp.number_of<std::uint64_t>(attr, value, "depth");
                    if (*decl.declared_depth == 0)
                        lp.fail(attr, "depth must be at least 1");
                } else if (key == "group") {
                    if (value.empty())
                        lp.fail(attr, "empty group name");
                    decl.group = std::string(value);
                } else {
                    lp.fail(attr, "unknown fifo attribute '" + std::string(key) + "'");
                }
            }
            if (!has_width)
                lp.fail_end("fifo declaration requires width=<bits>");
            if (fifos.count(id))
                lp.fail(id_tok, "duplicate fifo id " + std::to_string(id));
            fifos.emplace(id, std::move(decl));
        } else if (head.text == "task") {
            const Token& id_tok = lp.at(1, "task id");
            auto id = lp.number<std::uint32_t>(id_tok, "task id");
            std::string name(lp.at(2, "task name").text);
            lp.expect_arity(3);
            if (tasks.count(id))
                lp.fail(id_tok, "duplicate task id " + std::to_string(id));
            auto& task = tasks[id];
            task.id = id;
            task.name = std::move(name);
            current = &task;
            task_line = line_no;
        } else if (head.text == "end") {
            lp.fail(head, "'end' outside of a task body");
        } else {
            lp.fail(head, "unknown statement '" + std::string(head.text) + "'");
        }
    }

    if (!seen_header)
        throw TraceSyntaxError(1, 1, "missing 'trace-format 1' header");
    if (current)
        throw TraceSyntaxError(task_line, 1, "task '" + current->name + "' is missing 'end'");

    std::uint64_t expect = 0;
    for (auto& [id, decl] : fifos) {
        if (id != expect) {
            semantic.push_back({0, 0, "fifo ids are not dense: missing id " + std::to_string(expect)});
            break;
        }
        ++expect;
    }
    expect = 0;
    for (auto& [id, task] : tasks) {
        if (id != expect) {
            semantic.push_back({0, 0, "task ids are not dense: missing id " + std::to_string(expect)});
            break;
        }
        ++expect;
    }
    if (!semantic.empty())
        throw TraceValidationError(std::move(semantic));

    for (auto& [id, decl] : fifos)
        program.fifos.push_back(std::move(decl));
    for (auto& [id, task] : tasks)
        program.tasks.push_back(std::move(task));
    validate(program);
    return program;
}

std::string serialize_trace(const TraceProgram& program) {
    std::ostringstream os;
    os << "trace-format 1\n";
    os << "program " << (program.name.empty() ? "unnamed" : program.name) << "\n";
    for (const auto& f : program.fifos) {
        os << "fifo " << f.id << ' ' << f.name << " width=" << f.bitwidth;
        if (f.declared_depth)
            os << " depth=" << *f.declared_depth;
        if (f.group)
            os << " group=" << *f.group;
        os << "\n";
    }
    for (const auto& t : program.tasks) {
        os << "task " << t.id << ' ' << t.name << "\n";
        for (const auto& ev : t.events) {
            if (auto* c = std::get_if<Compute>(&ev))
                os << "  c " << c->cycles << "\n";
            else if (auto* r = std::get_if<Read>(&ev))
                os << "  r " << r->fifo << "\n";
            else
                os << "  w " << std::get<Write>(ev).fifo << "\n";
        }
        os << "end\n";
    }
    return os.str();
}

namespace {

// Replays the program with unbounded channels and no timing; a task stalls
// only when it reads a token that has not been written yet. Returns the
// tasks left stuck.
std::vector<TaskId> unbounded_stuck_tasks(const TraceProgram& program) {
    const std::size_t nt = program.tasks.size();
    std::vector<std::size_t> pc(nt, 0);
    std::vector<std::uint64_t> written(program.fifos.size(), 0), read(program.fifos.size(), 0);
    std::vector<TaskId> waiting_reader(program.fifos.size(), static_cast<TaskId>(-1));
    std::vector<TaskId> ready;
    for (TaskId t = 0; t < nt; ++t)
        ready.push_back(t);

    while (!ready.empty()) {
        TaskId t = ready.back();
        ready.pop_back();
        const auto& events = program.tasks[t].events;
        while (pc[t] < events.size()) {
            const Event& ev = events[pc[t]];
            if (auto* r = std::get_if<Read>(&ev)) {
                if (read[r->fifo] == written[r->fifo]) {
                    waiting_reader[r->fifo] = t;
                    break;
                }
                ++read[r->fifo];
            } else if (auto* w = std::get_if<Write>(&ev)) {
                ++written[w->fifo];
                if (waiting_reader[w->fifo] != static_cast<TaskId>(-1)) {
                    ready.push_back(waiting_reader[w->fifo]);
                    waiting_reader[w->fifo] = static_cast<TaskId>(-1);
                }
            }
            ++pc[t];
        }
    }
    std::vector<TaskId> stuck;
    for (TaskId t = 0; t < nt; ++t)
        if (pc[t] < program.tasks[t].events.size())
            stuck.push_back(t);
    return stuck;
}

} // namespace

void validate(TraceProgram& program) {
    std::vector<Diagnostic> errors;
    const std::size_t nf = program.fifos.size();

    std::unordered_map<std::string, FifoId> names;
    for (FifoId i = 0; i < nf; ++i) {
        auto& f = program.fifos[i];
        if (f.id != i)
            errors.push_back({0, 0, "fifo '" + f.name + "' has id " + std::to_string(f.id) + " at index " + std::to_string(i)});
        if (f.bitwidth == 0)
            errors.push_back({0, 0, "fifo '" + f.name + "' has zero width"});
        if (f.declared_depth && *f.declared_depth == 0)
            errors.push_back({0, 0, "fifo '" + f.name + "' has zero declared depth"});
        if (!names.emplace(f.name, i).second)
            errors.push_back({0, 0, "duplicate fifo name '" + f.name + "'"});
        f.producer_task.reset();
        f.consumer_task.reset();
    }
    for (TaskId t = 0; t < program.tasks.size(); ++t)
        if (program.tasks[t].id != t)
            errors.push_back({0, 0, "task '" + program.tasks[t].name + "' has id " + std::to_string(program.tasks[t].id) + " at index " + std::to_string(t)});
    if (!errors.empty())
        throw TraceValidationError(std::move(errors));

    std::vector<std::uint64_t> writes(nf, 0), reads(nf, 0);
    std::vector<std::uint8_t> multi_producer(nf, 0), multi_consumer(nf, 0);
    for (const auto& task : program.tasks) {
        for (const auto& ev : task.events) {
            FifoId id;
            bool is_write;
            if (auto* r = std::get_if<Read>(&ev)) {
                id = r->fifo;
                is_write = false;
            } else if (auto* w = std::get_if<Write>(&ev)) {
                id = w->fifo;
                is_write = true;
            } else {
                continue;
            }
            if (id >= nf) {
                errors.push_back({0, 0, "task '" + task.name + "' references unknown fifo id " + std::to_string(id)});
                continue;
            }
            auto& f = program.fifos[id];
            auto& slot = is_write ? f.producer_task : f.consumer_task;
            if (slot && *slot != task.id) {
                auto& flag = is_write ? multi_producer[id] : multi_consumer[id];
                if (!flag)
                    errors.push_back({0, 0, "fifo '" + f.name + "' has multiple " + (is_write ? "producers" : "consumers")});
                flag = 1;
            }
            if (!slot)
                slot = task.id;
            ++(is_write ? writes : reads)[id];
        }
    }
    for (FifoId i = 0; i < nf; ++i) {
        const auto& f = program.fifos[i];
        if (f.producer_task && f.consumer_task && *f.producer_task == *f.consumer_task)
            errors.push_back({0, 0, "fifo '" + f.name + "' is a self-loop on task " + std::to_string(*f.producer_task)});
        if (reads[i] > writes[i])
            errors.push_back({0, 0, "fifo '" + f.name + "': reads exceed writes (" + std::to_string(reads[i]) + " > " + std::to_string(writes[i]) + ")"});
    }
    if (!errors.empty())
        throw TraceValidationError(std::move(errors));

    auto stuck = unbounded_stuck_tasks(program);
    if (!stuck.empty()) {
        std::string list;
        for (auto t : stuck)
            list += (list.empty() ? "" : ", ") + program.tasks[t].name;
        throw TraceValidationError({{0, 0, "unconditional deadlock: tasks {" + list + "} wait on each other even with unbounded fifos"}});
    }
}

ChannelCounts channel_counts(const TraceProgram& program) {
    ChannelCounts counts;
    counts.writes.assign(program.fifos.size(), 0);
    counts.reads.assign(program.fifos.size(), 0);
    for (const auto& task : program.tasks)
        for (const auto& ev : task.events) {
            if (auto* r = std::get_if<Read>(&ev))
                ++counts.reads.at(r->fifo);
            else if (auto* w = std::get_if<Write>(&ev))
                ++counts.writes.at(w->fifo);
        }
    return counts;
}

Depth upper_bound(const TraceProgram& program, FifoId fifo) {
    const auto& f = program.fifos.at(fifo);
    if (f.declared_depth)
        return std::max<Depth>(*f.declared_depth, 2);
    Depth writes = 0;
    for (const auto& task : program.tasks)
        for (const auto& ev : task.events)
            if (auto* w = std::get_if<Write>(&ev); w && w->fifo == fifo)
                ++writes;
    return std::max<Depth>(writes, 2);
}

std::vector<Depth> upper_bounds(const TraceProgram& program) {
    auto counts = channel_counts(program);
    std::vector<Depth> out(program.fifos.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& f = program.fifos[i];
        out[i] = std::max<Depth>(f.declared_depth ? *f.declared_depth : counts.writes[i], 2);
    }
    return out;
}

std::vector<std::vector<FifoId>> fifo_groups(const TraceProgram& program) {
    std::vector<std::vector<FifoId>> cells;
    std::unordered_map<std::string, std::size_t> by_label;
    for (const auto& f : program.fifos) {
        if (!f.group) {
            cells.push_back({f.id});
            continue;
        }
        auto [it, inserted] = by_label.emplace(*f.group, cells.size());
        if (inserted)
            cells.emplace_back();
        cells[it->second].push_back(f.id);
    }
    return cells;
}

std::uint64_t event_count(const TraceProgram& program) {
    std::uint64_t n = 0;
    for (const auto& t : program.tasks)
        n += t.events.size();
    return n;
}

void check_config_bounds(const TraceProgram& program, const FifoConfig& config) {
    if (config.depths.size() != program.fifos.size())
        throw TraceValidationError({{0, 0, "config has " + std::to_string(config.depths.size()) + " depths for " +
                                               std::to_string(program.fifos.size()) + " fifos"}});
    auto bounds = upper_bounds(program);
    std::vector<Diagnostic> errors;
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        Depth d = config.depths[i];
        if (d < 2 || d > bounds[i])
            errors.push_back({0, 0, "fifo '" + program.fifos[i].name + "' depth " + std::to_string(d) +
                                        " outside [2, " + std::to_string(bounds[i]) + "]"});
    }
    if (!errors.empty())
        throw TraceValidationError(std::move(errors));
}

} // namespace fifo_advisor
