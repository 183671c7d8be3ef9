#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>
#include <vector>

#include "nmcsim/time.hpp"

namespace nmcsim {

using NodeId = std::uint32_t;
using EventKind = std::uint32_t;
using EventId = std::uint64_t;

constexpr EventId kInvalidEvent = 0;

struct EventRecord {
    TimePs time;
    EventId seq;
    NodeId target;
    EventKind kind;

    bool operator==(const EventRecord&) const = default;
};

// Deterministic discrete-event kernel. Events dequeue in nondecreasing time
// order; ties break by ascending insertion sequence, so a given schedule
// replays identically. Single-threaded by design: run independent instances
// for parallelism.
class Engine {
public:
    using Callback = std::function<void()>;

    // Enqueue a callback at absolute time `t` (>= now, else SimError).
    // Returns a handle usable with cancel().
    EventId schedule(TimePs t, NodeId target, EventKind kind, Callback cb);

    // Remove a not-yet-processed event. Returns false if the handle is
    // unknown, already processed, or already cancelled.
    bool cancel(EventId id);

    // Process all events with time <= t_end (t_end >= now, else SimError).
    // Returns the number of events processed; cancelled events do not count.
    std::size_t run_until(TimePs t_end);

    std::size_t run_all() { return run_until(std::numeric_limits<TimePs>::max()); }

    TimePs now() const { return now_; }
    std::size_t pending() const { return callbacks_.size(); }
    std::uint64_t processed_count() const { return processed_; }

    // FNV-1a hash over (time, seq, target, kind) of every processed event.
    std::uint64_t trace_hash() const { return trace_hash_; }

    // Sequence number the currently executing event was inserted with.
    // Used by arbiters to order arrivals deterministically.
    EventId current_seq() const { return current_seq_; }

    void keep_trace_log(bool on) { keep_log_ = on; }
    const std::vector<EventRecord>& trace_log() const { return trace_log_; }

private:
    struct QueueEntry {
        TimePs time;
        EventId seq;
        NodeId target;
        EventKind kind;
    };
    struct Later {
        bool operator()(const QueueEntry& a, const QueueEntry& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<QueueEntry, std::vector<QueueEntry>, Later> queue_;
    std::unordered_map<EventId, Callback> callbacks_;
    TimePs now_ = 0;
    EventId next_seq_ = 1;
    EventId current_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
    bool keep_log_ = false;
    std::vector<EventRecord> trace_log_;
};

}  // namespace nmcsim
