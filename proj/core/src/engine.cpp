#include "nmcsim/engine.hpp"

#include <string>

#include "nmcsim/errors.hpp"

namespace nmcsim {

namespace {

void fnv1a_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

EventId Engine::schedule(TimePs t, NodeId target, EventKind kind, Callback cb) {
    if (t < now_) {
        throw SimError("schedule",
                       "cannot schedule event in the past: t=" + std::to_string(t) +
                           " ps < now=" + std::to_string(now_) + " ps");
    }
    const EventId id = next_seq_++;
    queue_.push(QueueEntry{t, id, target, kind});
    callbacks_.emplace(id, std::move(cb));
    return id;
}

bool Engine::cancel(EventId id) {
    return callbacks_.erase(id) > 0;
}

std::size_t Engine::run_until(TimePs t_end) {
    if (t_end < now_) {
        throw SimError("schedule",
                       "run_until target " + std::to_string(t_end) +
                           " ps is before now=" + std::to_string(now_) + " ps");
    }
    std::size_t n = 0;
    while (!queue_.empty() && queue_.top().time <= t_end) {
        const QueueEntry e = queue_.top();
        queue_.pop();
        auto it = callbacks_.find(e.seq);
        if (it == callbacks_.end()) continue;  // cancelled
        Callback cb = std::move(it->second);
        callbacks_.erase(it);

        now_ = e.time;
        current_seq_ = e.seq;
        fnv1a_mix(trace_hash_, static_cast<std::uint64_t>(e.time));
        fnv1a_mix(trace_hash_, e.seq);
        fnv1a_mix(trace_hash_, (static_cast<std::uint64_t>(e.target) << 32) | e.kind);
        if (keep_log_) trace_log_.push_back(EventRecord{e.time, e.seq, e.target, e.kind});

        cb();
        ++n;
        ++processed_;
    }
    return n;
}

}  // namespace nmcsim
