#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "streamlab/common/types.h"

namespace streamlab::control {

struct LeaderRecord {
  std::string leader;
  std::int64_t term = 0;
  SimTime write_time = 0;

  bool operator==(const LeaderRecord& o) const { return leader == o.leader && term == o.term; }
};

enum class StoreRole { Primary, Fallback };

class CoordinationStore {
 public:
  CoordinationStore(std::string name, StoreRole role) : name_(std::move(name)), role_(role) {}

  const std::string& name() const { return name_; }
  StoreRole role() const { return role_; }
  bool available() const { return available_; }
  void SetAvailable(bool up) { available_ = up; }

  // nullopt: unavailable. Inner nullopt: nothing written yet.
  std::optional<std::optional<LeaderRecord>> Read() const;
  bool Write(const LeaderRecord& rec);

  // Test hook: overwrite without availability checks.
  void Corrupt(const LeaderRecord& rec) { value_ = rec; }

 private:
  std::string name_;
  StoreRole role_;
  bool available_ = true;
  std::optional<LeaderRecord> value_;
};

enum class ResolveStatus { Leader, TerminateJobs };

struct ResolveResult {
  ResolveStatus status = ResolveStatus::Leader;
  std::optional<LeaderRecord> leader;
  bool from_fallback = false;
  std::string reason;  // "both_unavailable", "inconsistent", "no_leader"
};

// Primary first, fallback second; the fallback copy must agree with the
// in-memory view by term. Refreshes `cached` on success.
ResolveResult ResolveLeader(const CoordinationStore& primary, const CoordinationStore& fallback,
                            std::optional<LeaderRecord>& cached);

// Writes the new leader to both stores; fallback is written synchronously.
// Returns false if neither accepted the write.
bool PublishLeader(CoordinationStore& primary, CoordinationStore& fallback, const LeaderRecord& rec);

}  // namespace streamlab::control
