#include "streamlab/control/coordination.h"

namespace streamlab::control {

std::optional<std::optional<LeaderRecord>> CoordinationStore::Read() const {
  if (!available_) return std::nullopt;
  return value_;
}

bool CoordinationStore::Write(const LeaderRecord& rec) {
  if (!available_) return false;
  if (value_ && value_->term > rec.term) return false;
  value_ = rec;
  return true;
}

ResolveResult ResolveLeader(const CoordinationStore& primary, const CoordinationStore& fallback,
                            std::optional<LeaderRecord>& cached) {
  ResolveResult r;
  if (auto p = primary.Read(); p && *p) {
    r.leader = **p;
    if (!cached || cached->term <= r.leader->term) cached = r.leader;
    return r;
  }
  auto f = fallback.Read();
  if (!f) {
    r.status = ResolveStatus::TerminateJobs;
    r.reason = primary.available() ? "no_leader" : "both_unavailable";
    return r;
  }
  if (!*f) {
    r.status = ResolveStatus::TerminateJobs;
    r.reason = cached ? "inconsistent" : "no_leader";
    return r;
  }
  const LeaderRecord& rec = **f;
  if (cached && (rec.term < cached->term || (rec.term == cached->term && rec.leader != cached->leader))) {
    r.status = ResolveStatus::TerminateJobs;
    r.reason = "inconsistent";
    return r;
  }
  r.leader = rec;
  r.from_fallback = true;
  cached = rec;
  return r;
}

bool PublishLeader(CoordinationStore& primary, CoordinationStore& fallback, const LeaderRecord& rec) {
  bool a = primary.Write(rec);
  bool b = fallback.Write(rec);
  return a || b;
}

}  // namespace streamlab::control
