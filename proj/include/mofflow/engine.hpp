#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <queue>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mofflow/surrogate.hpp"

namespace mofflow {

enum class ClockMode { Virtual, RealTime };
enum class TaskState { Pending, Running, Completed, Failed };

std::string to_string(TaskState s);

struct ResourcePool {
    int nodes = 1;
    int slots_per_node = 12; // one GPU tile per simulation, 12 tiles per node
    int total_slots() const { return nodes * slots_per_node; }
};

struct TaskHandle {
    std::uint64_t id = 0;
};

struct TaskTiming {
    std::string task_id;
    std::string material_id;
    std::string condition_label;
    double submit = 0.0;
    double start = 0.0;
    double end = 0.0;
    int node = -1;
    int slot = -1;
    int attempts = 0;
};

struct EngineMetrics {
    double makespan = 0.0;
    double total_busy = 0.0;
    double utilization = 0.0;
    int total_slots = 0;
    std::vector<TaskTiming> tasks;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& os) const;
};

// Task body. Receives the attempt index (0-based) so retried runs can
// draw fresh randomness. Returns the outcome; outcome.duration_s is the
// virtual time the run occupies its slot.
using TaskBody = std::function<SimulationOutcome(int attempt)>;

// Slot-based FIFO ensemble scheduler. Virtual mode is a single-threaded
// discrete-event simulation, deterministic for a fixed submission
// sequence. Real-time mode runs the same policy on worker threads with
// durations compressed by `compression`.
class TaskEngine {
  public:
    struct Options {
        ResourcePool pool;
        ClockMode mode = ClockMode::Virtual;
        int max_retries = 2;
        double compression = 1000.0; // real-time mode only
    };

    explicit TaskEngine(Options options);
    ~TaskEngine();

    TaskEngine(const TaskEngine&) = delete;
    TaskEngine& operator=(const TaskEngine&) = delete;

    // Non-blocking; the task starts when a slot frees, FIFO by
    // submission order. Throws EngineError after shutdown.
    TaskHandle submit(const SimulationSpec& spec, TaskBody body);

    TaskState poll(TaskHandle handle) const;
    int attempts(TaskHandle handle) const;

    // Terminal outcome; throws EngineError if the task is not terminal.
    SimulationOutcome outcome(TaskHandle handle) const;

    // Blocks (real mode) or advances the event clock (virtual mode)
    // until all given handles are terminal.
    std::vector<SimulationOutcome> await_all(const std::vector<TaskHandle>& handles);

    // Virtual mode only: drain the event queue and return run metrics.
    EngineMetrics advance_to_idle();

    EngineMetrics metrics() const;

    // Engine-clock seconds: virtual time, or wall time x compression.
    double now() const;

    void shutdown();

  private:
    struct Task {
        std::uint64_t id = 0;
        SimulationSpec spec;
        TaskBody body;
        TaskState state = TaskState::Pending;
        double submit_t = 0.0;
        double start_t = 0.0;
        double end_t = 0.0;
        int node = -1;
        int slot = -1;
        int attempts = 0;
        SimulationOutcome outcome;
    };

    struct Event {
        double time;
        std::uint64_t seq;
        std::uint64_t task_id;
        bool operator>(const Event& other) const {
            if (time != other.time) return time > other.time;
            return seq > other.seq;
        }
    };

    Task& find_locked(TaskHandle handle);
    const Task& find_locked(TaskHandle handle) const;
    void start_ready_locked();
    void finish_one_event_locked();
    bool all_terminal_locked(const std::vector<TaskHandle>& handles) const;
    EngineMetrics metrics_locked() const;
    double real_now_locked() const;

    void worker_loop(int slot_index);

    Options options_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, Task> tasks_;
    std::deque<std::uint64_t> pending_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    std::uint64_t next_id_ = 1;
    std::uint64_t next_event_seq_ = 1;
    double now_ = 0.0;
    int running_count_ = 0;
    double total_busy_ = 0.0;
    double max_end_ = 0.0;
    bool shut_down_ = false;
    // Free slot indices; lowest first so placement is deterministic.
    std::priority_queue<int, std::vector<int>, std::greater<int>> free_slots_;

    // Real-time mode.
    std::vector<std::thread> workers_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::chrono::steady_clock::time_point epoch_;
};

// (T0 * n0) / (T * n). Throws DomainError on non-positive input.
double scaling_efficiency(double baseline_nodes, double baseline_makespan,
                          double nodes, double makespan);

} // namespace mofflow
