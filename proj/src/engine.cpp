#include "mofflow/engine.hpp"

#include <cassert>
#include <chrono>
#include <ostream>

#include "mofflow/errors.hpp"

namespace mofflow {

std::string to_string(TaskState s) {
    switch (s) {
        case TaskState::Pending: return "pending";
        case TaskState::Running: return "running";
        case TaskState::Completed: return "completed";
        case TaskState::Failed: return "failed";
    }
    return "unknown";
}

nlohmann::json EngineMetrics::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : tasks) {
        rows.push_back({{"task_id", t.task_id},
                        {"material_id", t.material_id},
                        {"condition_label", t.condition_label},
                        {"submit", t.submit},
                        {"start", t.start},
                        {"end", t.end},
                        {"node", t.node},
                        {"slot", t.slot},
                        {"attempts", t.attempts}});
    }
    return {{"makespan", makespan},
            {"total_busy", total_busy},
            {"utilization", utilization},
            {"total_slots", total_slots},
            {"tasks", rows}};
}

void EngineMetrics::write_csv(std::ostream& os) const {
    os << "task_id,material_id,condition_label,submit,start,end,node,slot,attempts\n";
    for (const auto& t : tasks) {
        os << t.task_id << ',' << t.material_id << ',' << t.condition_label << ','
           << t.submit << ',' << t.start << ',' << t.end << ',' << t.node << ','
           << t.slot << ',' << t.attempts << '\n';
    }
}

TaskEngine::TaskEngine(Options options) : options_(options) {
    if (options_.pool.nodes < 1 || options_.pool.slots_per_node < 1) {
        throw EngineError("resource pool must have positive nodes and slots");
    }
    for (int i = 0; i < options_.pool.total_slots(); ++i) free_slots_.push(i);
    epoch_ = std::chrono::steady_clock::now();
    if (options_.mode == ClockMode::RealTime) {
        workers_.reserve(options_.pool.total_slots());
        for (int i = 0; i < options_.pool.total_slots(); ++i) {
            workers_.emplace_back([this, i] { worker_loop(i); });
        }
    }
}

TaskEngine::~TaskEngine() {
    shutdown();
}

double TaskEngine::real_now_locked() const {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - epoch_);
    return elapsed.count() * options_.compression;
}

double TaskEngine::now() const {
    std::lock_guard lock(mutex_);
    return options_.mode == ClockMode::Virtual ? now_ : real_now_locked();
}

TaskHandle TaskEngine::submit(const SimulationSpec& spec, TaskBody body) {
    std::lock_guard lock(mutex_);
    if (shut_down_) throw EngineError("submit after shutdown rejected");
    Task task;
    task.id = next_id_++;
    task.spec = spec;
    task.body = std::move(body);
    task.submit_t = options_.mode == ClockMode::Virtual ? now_ : real_now_locked();
    const std::uint64_t id = task.id;
    tasks_.emplace(id, std::move(task));
    pending_.push_back(id);
    if (options_.mode == ClockMode::RealTime) work_cv_.notify_one();
    return TaskHandle{id};
}

TaskEngine::Task& TaskEngine::find_locked(TaskHandle handle) {
    auto it = tasks_.find(handle.id);
    if (it == tasks_.end()) throw EngineError("unknown task handle");
    return it->second;
}

const TaskEngine::Task& TaskEngine::find_locked(TaskHandle handle) const {
    auto it = tasks_.find(handle.id);
    if (it == tasks_.end()) throw EngineError("unknown task handle");
    return it->second;
}

TaskState TaskEngine::poll(TaskHandle handle) const {
    std::lock_guard lock(mutex_);
    return find_locked(handle).state;
}

int TaskEngine::attempts(TaskHandle handle) const {
    std::lock_guard lock(mutex_);
    return find_locked(handle).attempts;
}

SimulationOutcome TaskEngine::outcome(TaskHandle handle) const {
    std::lock_guard lock(mutex_);
    const Task& t = find_locked(handle);
    if (t.state != TaskState::Completed && t.state != TaskState::Failed) {
        throw EngineError("task not terminal");
    }
    return t.outcome;
}

void TaskEngine::start_ready_locked() {
    while (!pending_.empty() && !free_slots_.empty()) {
        const std::uint64_t id = pending_.front();
        pending_.pop_front();
        Task& t = tasks_.at(id);
        const int slot_index = free_slots_.top();
        free_slots_.pop();
        t.node = slot_index / options_.pool.slots_per_node;
        t.slot = slot_index % options_.pool.slots_per_node;
        t.state = TaskState::Running;
        t.start_t = now_;
        t.outcome = t.body(t.attempts);
        ++t.attempts;
        ++running_count_;
        assert(running_count_ <= options_.pool.total_slots());
        events_.push(Event{now_ + t.outcome.duration_s, next_event_seq_++, id});
    }
}

void TaskEngine::finish_one_event_locked() {
    const Event ev = events_.top();
    events_.pop();
    now_ = ev.time;
    Task& t = tasks_.at(ev.task_id);
    t.end_t = now_;
    total_busy_ += t.outcome.duration_s;
    if (t.end_t > max_end_) max_end_ = t.end_t;
    free_slots_.push(t.node * options_.pool.slots_per_node + t.slot);
    --running_count_;
    if (t.outcome.status == RunStatus::Failed && t.attempts <= options_.max_retries) {
        t.state = TaskState::Pending;
        pending_.push_back(t.id); // immediate re-queue, zero backoff
    } else {
        t.state = t.outcome.status == RunStatus::Ok ? TaskState::Completed
                                                    : TaskState::Failed;
    }
}

bool TaskEngine::all_terminal_locked(const std::vector<TaskHandle>& handles) const {
    for (const auto& h : handles) {
        const Task& t = find_locked(h);
        if (t.state != TaskState::Completed && t.state != TaskState::Failed) return false;
    }
    return true;
}

std::vector<SimulationOutcome> TaskEngine::await_all(const std::vector<TaskHandle>& handles) {
    if (options_.mode == ClockMode::Virtual) {
        std::lock_guard lock(mutex_);
        // Validate handles up front so unknown ids fail fast.
        for (const auto& h : handles) find_locked(h);
        while (!all_terminal_locked(handles)) {
            start_ready_locked();
            if (events_.empty()) {
                throw EngineError("await_all: tasks cannot make progress");
            }
            finish_one_event_locked();
        }
    } else {
        std::unique_lock lock(mutex_);
        for (const auto& h : handles) find_locked(h);
        done_cv_.wait(lock, [&] { return all_terminal_locked(handles); });
    }
    std::vector<SimulationOutcome> out;
    out.reserve(handles.size());
    for (const auto& h : handles) out.push_back(outcome(h));
    return out;
}

EngineMetrics TaskEngine::advance_to_idle() {
    if (options_.mode != ClockMode::Virtual) {
        throw EngineError("advance_to_idle is a virtual-mode operation");
    }
    std::lock_guard lock(mutex_);
    while (!pending_.empty() || !events_.empty()) {
        start_ready_locked();
        if (events_.empty()) break;
        finish_one_event_locked();
    }
    return metrics_locked();
}

EngineMetrics TaskEngine::metrics_locked() const {
    EngineMetrics m;
    m.total_slots = options_.pool.total_slots();
    m.makespan = max_end_;
    m.total_busy = total_busy_;
    m.utilization = m.makespan > 0.0
                        ? m.total_busy / (m.makespan * m.total_slots)
                        : 0.0;
    std::vector<const Task*> ordered;
    ordered.reserve(tasks_.size());
    for (const auto& [id, t] : tasks_) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const Task* a, const Task* b) { return a->id < b->id; });
    for (const Task* t : ordered) {
        TaskTiming row;
        row.task_id = "task-" + std::to_string(t->id);
        row.material_id = t->spec.material.id;
        row.condition_label = t->spec.condition.label();
        row.submit = t->submit_t;
        row.start = t->start_t;
        row.end = t->end_t;
        row.node = t->node;
        row.slot = t->slot;
        row.attempts = t->attempts;
        m.tasks.push_back(std::move(row));
    }
    return m;
}

EngineMetrics TaskEngine::metrics() const {
    std::lock_guard lock(mutex_);
    return metrics_locked();
}

void TaskEngine::worker_loop(int slot_index) {
    for (;;) {
        std::uint64_t id = 0;
        {
            std::unique_lock lock(mutex_);
            work_cv_.wait(lock, [&] { return shut_down_ || !pending_.empty(); });
            if (shut_down_ && pending_.empty()) return;
            id = pending_.front();
            pending_.pop_front();
            Task& t = tasks_.at(id);
            t.node = slot_index / options_.pool.slots_per_node;
            t.slot = slot_index % options_.pool.slots_per_node;
            t.state = TaskState::Running;
            t.start_t = real_now_locked();
            ++running_count_;
            assert(running_count_ <= options_.pool.total_slots());
        }
        Task* t = nullptr;
        SimulationOutcome outcome;
        {
            std::lock_guard lock(mutex_);
            t = &tasks_.at(id);
            outcome = t->body(t->attempts);
            ++t->attempts;
        }
        std::this_thread::sleep_for(
            std::chrono::duration<double>(outcome.duration_s / options_.compression));
        {
            std::lock_guard lock(mutex_);
            t = &tasks_.at(id);
            t->outcome = outcome;
            t->end_t = real_now_locked();
            total_busy_ += outcome.duration_s;
            if (t->end_t > max_end_) max_end_ = t->end_t;
            --running_count_;
            if (outcome.status == RunStatus::Failed && t->attempts <= options_.max_retries) {
                t->state = TaskState::Pending;
                pending_.push_back(id);
                work_cv_.notify_one();
            } else {
                t->state = outcome.status == RunStatus::Ok ? TaskState::Completed
                                                           : TaskState::Failed;
            }
            done_cv_.notify_all();
        }
    }
}

void TaskEngine::shutdown() {
    {
        std::lock_guard lock(mutex_);
        if (shut_down_) return;
        shut_down_ = true;
    }
    work_cv_.notify_all();
    for (auto& w : workers_) {
        if (w.joinable()) w.join();
    }
}

double scaling_efficiency(double baseline_nodes, double baseline_makespan,
                          double nodes, double makespan) {
    if (!(baseline_nodes > 0.0 && baseline_makespan > 0.0 && nodes > 0.0 &&
          makespan > 0.0)) {
        throw DomainError("scaling_efficiency requires positive inputs");
    }
    return (baseline_makespan * baseline_nodes) / (makespan * nodes);
}

} // namespace mofflow
