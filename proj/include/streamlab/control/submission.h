#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "streamlab/common/types.h"

namespace streamlab::control {

struct SubmissionRequest {
  std::string job_id;
  std::string idempotency_key;
  int attempts = 0;
};

struct RetryPolicy {
  SimTime base = kSecond;
  double factor = 2.0;
  int max_attempts = 5;
};

// Delay before retry i (0-based): base * factor^i.
std::vector<SimTime> BackoffDelays(const RetryPolicy& p, int n);

// What happens to one delivery attempt on the orchestration endpoint.
struct AttemptFault {
  bool endpoint_down = false;
  bool request_lost = false;
  bool ack_lost = false;
  bool duplicated = false;  // request delivered twice
};

// Orchestration endpoint with uniqueness validation on idempotency keys.
class Orchestrator {
 public:
  struct Response {
    bool accepted = false;
    bool existing = false;
    std::int64_t execution_id = -1;
  };

  Response Deliver(const SubmissionRequest& req);
  int executions(const std::string& key) const;
  std::int64_t total_executions() const { return next_id_; }

 private:
  std::map<std::string, std::int64_t> accepted_;
  std::map<std::string, int> executions_;
  std::int64_t next_id_ = 0;
};

enum class SubmitStatus { Accepted, Rejected };

struct SubmitResult {
  SubmitStatus status = SubmitStatus::Rejected;
  bool existing = false;
  int attempts = 0;
  std::vector<SimTime> delays;  // waits actually taken between attempts
  std::int64_t execution_id = -1;
  std::string reason;
};

// `schedule[i]` scripts attempt i; attempts past its end see a healthy
// endpoint.
SubmitResult SubmitWithRetry(SubmissionRequest& req, const RetryPolicy& policy, Orchestrator& orch,
                             const std::vector<AttemptFault>& schedule);

}  // namespace streamlab::control
