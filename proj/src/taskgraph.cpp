/* Copyright 2026 The Floworc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "floworc/taskgraph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include <json.hpp>

#include "floworc/reliability.hpp"

namespace floworc {

std::string to_string(ParamDirection d) {
    switch (d) {
        case ParamDirection::In: return "IN";
        case ParamDirection::Out: return "OUT";
        case ParamDirection::InOut: return "INOUT";
    }
    return "IN";
}

ParamDirection direction_from_string(std::string_view s) {
    if (s == "IN") return ParamDirection::In;
    if (s == "OUT") return ParamDirection::Out;
    if (s == "INOUT") return ParamDirection::InOut;
    throw ConfigError("unknown parameter direction '" + std::string(s) + "'");
}

std::string to_string(TaskState s) {
    switch (s) {
        case TaskState::Created: return "CREATED";
        case TaskState::Ready: return "READY";
        case TaskState::Scheduled: return "SCHEDULED";
        case TaskState::Running: return "RUNNING";
        case TaskState::Done: return "DONE";
        case TaskState::Failed: return "FAILED";
        case TaskState::IgnoredFailed: return "IGNORED_FAILED";
        case TaskState::Cancelled: return "CANCELLED";
        case TaskState::Skipped: return "SKIPPED";
    }
    return "CREATED";
}

bool is_terminal(TaskState s) {
    return s == TaskState::Done || s == TaskState::Failed || s == TaskState::IgnoredFailed ||
           s == TaskState::Cancelled || s == TaskState::Skipped;
}

bool releases_successors(TaskState s) {
    return s == TaskState::Done || s == TaskState::IgnoredFailed || s == TaskState::Skipped;
}

std::vector<Binding> TaskInstance::output_bindings() const {
    std::vector<Binding> out;
    for (const auto& b : bindings)
        if (b.direction != ParamDirection::In) out.push_back(b);
    return out;
}

void TaskGraph::add_type(TaskType type) {
    if (type.params.empty())
        throw ConfigError("task type '" + type.name + "' declares no parameters");
    std::set<std::string> names;
    for (const auto& p : type.params)
        if (!names.insert(p.name).second)
            throw ConfigError("task type '" + type.name + "' has duplicate parameter '" + p.name + "'");
    types_[type.name] = std::move(type);
}

bool TaskGraph::has_type(std::string_view name) const {
    return types_.find(name) != types_.end();
}

const TaskType& TaskGraph::type(std::string_view name) const {
    auto it = types_.find(name);
    if (it == types_.end()) throw GraphError("unknown task type '" + std::string(name) + "'");
    return it->second;
}

DataItem& TaskGraph::item_for_read(const std::string& token) {
    auto it = data_.find(token);
    if (it == data_.end()) {
        // First reference of an unwritten token: a workflow input, version 0.
        DataItem item;
        item.token = token;
        item.versions.push_back(DataVersionInfo{0, std::nullopt, {}});
        it = data_.emplace(token, std::move(item)).first;
    }
    return it->second;
}

void TaskGraph::add_edge(TaskId from, TaskId to) {
    if (from == to) return;
    tasks_.at(from).successors.insert(to);
    tasks_.at(to).predecessors.insert(from);
}

TaskId TaskGraph::register_task(const std::string& type_name, const std::vector<std::string>& args,
                                const InfraConfig& env) {
    const TaskType& tt = type(type_name);
    if (args.size() != tt.params.size())
        throw GraphError("task type '" + type_name + "' expects " +
                         std::to_string(tt.params.size()) + " arguments, got " +
                         std::to_string(args.size()));

    // Templates resolve now so that a missing env variable fails at
    // registration, not mid-execution.
    ResolvedPolicies resolved =
        resolve_template(tt.constraint_template, tt.reliability_template, env);

    const TaskId id = next_id_++;
    TaskInstance inst;
    inst.id = id;
    inst.type = type_name;
    inst.constraints = std::move(resolved.constraints);
    inst.reliability = std::move(resolved.reliability);
    inst.retries_left = inst.reliability.max_retries;
    tasks_.emplace(id, std::move(inst));
    TaskInstance& task = tasks_.at(id);

    std::set<TaskId> preds;
    std::set<std::string> written_here;
    try {
        for (std::size_t i = 0; i < tt.params.size(); ++i) {
            const ParamSpec& p = tt.params[i];
            const std::string& token = args[i];
            switch (p.direction) {
                case ParamDirection::In: {
                    if (written_here.count(token))
                        throw GraphError("task type '" + type_name + "': parameter '" + p.name +
                                         "' reads token '" + token +
                                         "' already written by an earlier parameter of the same task");
                    DataItem& item = item_for_read(token);
                    DataVersionInfo& v = item.versions.back();
                    if (v.producer) preds.insert(*v.producer);
                    v.readers.push_back(id);
                    task.bindings.push_back(Binding{token, v.seq, ParamDirection::In});
                    break;
                }
                case ParamDirection::InOut: {
                    if (written_here.count(token))
                        throw GraphError("task type '" + type_name + "': parameter '" + p.name +
                                         "' reads token '" + token +
                                         "' already written by an earlier parameter of the same task");
                    DataItem& item = item_for_read(token);
                    DataVersionInfo& old = item.versions.back();
                    if (old.producer) preds.insert(*old.producer);
                    // Write-after-read: the new version must not overtake readers
                    // of the version it supersedes.
                    for (TaskId r : old.readers)
                        if (r != id) preds.insert(r);
                    old.readers.push_back(id);
                    const std::uint32_t seq = old.seq + 1;
                    item.versions.push_back(DataVersionInfo{seq, id, {}});
                    task.bindings.push_back(Binding{token, seq, ParamDirection::InOut});
                    written_here.insert(token);
                    break;
                }
                case ParamDirection::Out: {
                    auto it = data_.find(token);
                    if (it == data_.end()) {
                        DataItem item;
                        item.token = token;
                        // First version of a task-produced item is 1; 0 is
                        // reserved for workflow inputs.
                        item.versions.push_back(DataVersionInfo{1, id, {}});
                        data_.emplace(token, std::move(item));
                        task.bindings.push_back(Binding{token, 1, ParamDirection::Out});
                    } else {
                        DataVersionInfo& old = it->second.versions.back();
                        // Write-after-write: successive writers of one item serialize.
                        if (old.producer) preds.insert(*old.producer);
                        const std::uint32_t seq = old.seq + 1;
                        it->second.versions.push_back(DataVersionInfo{seq, id, {}});
                        task.bindings.push_back(Binding{token, seq, ParamDirection::Out});
                    }
                    written_here.insert(token);
                    break;
                }
            }
        }
    } catch (...) {
        // Roll back the partially registered task so the graph stays consistent.
        for (auto& [token, item] : data_) {
            while (!item.versions.empty() && item.versions.back().producer == id)
                item.versions.pop_back();
            for (auto& v : item.versions)
                std::erase(v.readers, id);
        }
        std::erase_if(data_, [](const auto& kv) { return kv.second.versions.empty(); });
        tasks_.erase(id);
        --next_id_;
        throw;
    }

    preds.erase(id);
    for (TaskId p : preds) add_edge(p, id);
    task.fingerprint = task_fingerprint(tt, task.bindings, task.constraints);

    bool doomed = false;
    for (TaskId p : preds) {
        const TaskState ps = tasks_.at(p).state;
        if (ps == TaskState::Failed || ps == TaskState::Cancelled) doomed = true;
    }
    if (doomed) {
        task.state = TaskState::Cancelled;
    } else {
        refresh_readiness(id);
    }
    return id;
}

void TaskGraph::refresh_readiness(TaskId id) {
    TaskInstance& t = tasks_.at(id);
    if (t.state != TaskState::Created) return;
    for (TaskId p : t.predecessors)
        if (!releases_successors(tasks_.at(p).state)) return;
    t.state = TaskState::Ready;
    ready_.insert(id);
}

std::vector<TaskId> TaskGraph::ready_tasks() const {
    return {ready_.begin(), ready_.end()};
}

CompletionResult TaskGraph::complete_task(TaskId id, Outcome outcome) {
    TaskInstance& t = task_mut(id);
    CompletionResult result;
    switch (outcome) {
        case Outcome::Done:
        case Outcome::IgnoredFailed: {
            if (t.state != TaskState::Running)
                throw GraphError("task " + std::to_string(id) + " cannot complete from state " +
                                 to_string(t.state));
            t.state = outcome == Outcome::Done ? TaskState::Done : TaskState::IgnoredFailed;
            for (TaskId s : t.successors) {
                refresh_readiness(s);
                if (tasks_.at(s).state == TaskState::Ready) result.newly_ready.push_back(s);
            }
            break;
        }
        case Outcome::Failed:
        case Outcome::Cancelled: {
            if (outcome == Outcome::Failed) {
                if (t.state != TaskState::Running)
                    throw GraphError("task " + std::to_string(id) + " cannot fail from state " +
                                     to_string(t.state));
                t.state = TaskState::Failed;
            } else {
                if (t.state != TaskState::Running && t.state != TaskState::Scheduled)
                    throw GraphError("task " + std::to_string(id) + " cannot cancel from state " +
                                     to_string(t.state));
                t.state = TaskState::Cancelled;
            }
            // Transitive cancellation: nothing downstream can ever run.
            std::deque<TaskId> frontier(t.successors.begin(), t.successors.end());
            while (!frontier.empty()) {
                const TaskId s = frontier.front();
                frontier.pop_front();
                TaskInstance& st = tasks_.at(s);
                if (st.state != TaskState::Created && st.state != TaskState::Ready) continue;
                ready_.erase(s);
                st.state = TaskState::Cancelled;
                result.cancelled.push_back(s);
                for (TaskId nxt : st.successors) frontier.push_back(nxt);
            }
            break;
        }
    }
    std::sort(result.cancelled.begin(), result.cancelled.end());
    return result;
}

void TaskGraph::mark_scheduled(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (t.state != TaskState::Ready)
        throw GraphError("task " + std::to_string(id) + " cannot be scheduled from state " +
                         to_string(t.state));
    ready_.erase(id);
    t.state = TaskState::Scheduled;
}

void TaskGraph::mark_running(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (t.state != TaskState::Scheduled)
        throw GraphError("task " + std::to_string(id) + " cannot start from state " +
                         to_string(t.state));
    t.state = TaskState::Running;
}

void TaskGraph::requeue_for_retry(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (t.state != TaskState::Running && t.state != TaskState::Scheduled)
        throw GraphError("task " + std::to_string(id) + " cannot retry from state " +
                         to_string(t.state));
    t.state = TaskState::Ready;
    t.attempt += 1;
    ready_.insert(id);
}

void TaskGraph::unschedule(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (t.state != TaskState::Scheduled)
        throw GraphError("task " + std::to_string(id) + " cannot unschedule from state " +
                         to_string(t.state));
    t.state = TaskState::Ready;
    ready_.insert(id);
}

std::vector<TaskId> TaskGraph::skip_task(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (t.state != TaskState::Created && t.state != TaskState::Ready)
        throw GraphError("task " + std::to_string(id) + " cannot be skipped from state " +
                         to_string(t.state));
    ready_.erase(id);
    t.state = TaskState::Skipped;
    std::vector<TaskId> newly_ready;
    for (TaskId s : t.successors) {
        refresh_readiness(s);
        if (tasks_.at(s).state == TaskState::Ready) newly_ready.push_back(s);
    }
    return newly_ready;
}

void TaskGraph::cancel_task(TaskId id) {
    TaskInstance& t = task_mut(id);
    if (is_terminal(t.state)) return;
    ready_.erase(id);
    t.state = TaskState::Cancelled;
}

const TaskInstance& TaskGraph::task(TaskId id) const {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw GraphError("unknown task id " + std::to_string(id));
    return it->second;
}

TaskInstance& TaskGraph::task_mut(TaskId id) {
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw GraphError("unknown task id " + std::to_string(id));
    return it->second;
}

std::size_t TaskGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& [id, t] : tasks_) n += t.successors.size();
    return n;
}

bool TaskGraph::all_terminal() const {
    for (const auto& [id, t] : tasks_)
        if (!is_terminal(t.state)) return false;
    return true;
}

std::size_t TaskGraph::count_state(TaskState s) const {
    std::size_t n = 0;
    for (const auto& [id, t] : tasks_) n += t.state == s;
    return n;
}

std::string TaskGraph::export_dot() const {
    std::ostringstream out;
    out << "digraph taskgraph {\n";
    for (const auto& [id, t] : tasks_)
        out << "  t" << id << " [label=\"" << t.type << "#" << id << "\"];\n";
    for (const auto& [id, t] : tasks_)
        for (TaskId s : t.successors) out << "  t" << id << " -> t" << s << ";\n";
    out << "}\n";
    return out.str();
}

namespace {

// Reachability closure as one bitset row per task. Registration only ever adds
// edges toward newer tasks, so ascending id is a topological order.
class ClosureMatrix {
public:
    ClosureMatrix(const std::map<TaskId, TaskInstance>& tasks) {
        index_.reserve(tasks.size());
        for (const auto& [id, t] : tasks) {
            pos_[id] = index_.size();
            index_.push_back(id);
        }
        words_ = (index_.size() + 63) / 64;
        rows_.assign(index_.size() * words_, 0);
        for (auto it = tasks.rbegin(); it != tasks.rend(); ++it) {
            const std::size_t row = pos_.at(it->first);
            for (TaskId s : it->second.successors) {
                const std::size_t srow = pos_.at(s);
                set(row, srow);
                for (std::size_t w = 0; w < words_; ++w)
                    rows_[row * words_ + w] |= rows_[srow * words_ + w];
            }
        }
    }

    bool reaches(std::size_t from, std::size_t to) const {
        return (rows_[from * words_ + to / 64] >> (to % 64)) & 1u;
    }

    std::size_t position(TaskId id) const { return pos_.at(id); }

private:
    void set(std::size_t row, std::size_t col) {
        rows_[row * words_ + col / 64] |= std::uint64_t{1} << (col % 64);
    }

    std::vector<TaskId> index_;
    std::map<TaskId, std::size_t> pos_;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> rows_;
};

// Kuhn augmenting-path matching; used for the Dilworth chain-cover bound.
bool try_augment(std::size_t u, const std::vector<std::vector<std::size_t>>& adj,
                 std::vector<char>& visited, std::vector<std::ptrdiff_t>& match_right) {
    for (std::size_t v : adj[u]) {
        if (visited[v]) continue;
        visited[v] = 1;
        if (match_right[v] < 0 ||
            try_augment(static_cast<std::size_t>(match_right[v]), adj, visited, match_right)) {
            match_right[v] = static_cast<std::ptrdiff_t>(u);
            return true;
        }
    }
    return false;
}

}  // namespace

std::size_t TaskGraph::max_antichain_width(const std::vector<TaskId>& subset) const {
    if (subset.empty()) return 0;
    ClosureMatrix closure(tasks_);
    const std::size_t n = subset.size();
    std::vector<std::size_t> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = closure.position(subset[i]);

    // Max antichain = |S| - max matching over comparability edges (Dilworth).
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && closure.reaches(pos[i], pos[j])) adj[i].push_back(j);

    std::vector<std::ptrdiff_t> match_right(n, -1);
    std::size_t matching = 0;
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<char> visited(n, 0);
        if (try_augment(u, adj, visited, match_right)) ++matching;
    }
    return n - matching;
}

GraphStats TaskGraph::stats() const {
    GraphStats s;
    s.tasks = tasks_.size();
    s.edges = edge_count();
    std::vector<TaskId> all;
    all.reserve(tasks_.size());
    for (const auto& [id, t] : tasks_) all.push_back(id);
    s.max_antichain_width = max_antichain_width(all);
    return s;
}

}  // namespace floworc
