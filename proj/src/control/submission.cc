#include "streamlab/control/submission.h"

#include <cmath>

namespace streamlab::control {

std::vector<SimTime> BackoffDelays(const RetryPolicy& p, int n) {
  std::vector<SimTime> out;
  double d = static_cast<double>(p.base);
  for (int i = 0; i < n; ++i) {
    out.push_back(static_cast<SimTime>(std::llround(d)));
    d *= p.factor;
  }
  return out;
}

Orchestrator::Response Orchestrator::Deliver(const SubmissionRequest& req) {
  Response r;
  r.accepted = true;
  auto it = accepted_.find(req.idempotency_key);
  if (it != accepted_.end()) {
    r.existing = true;
    r.execution_id = it->second;
    return r;
  }
  r.execution_id = next_id_++;
  accepted_[req.idempotency_key] = r.execution_id;
  ++executions_[req.idempotency_key];
  return r;
}

int Orchestrator::executions(const std::string& key) const {
  auto it = executions_.find(key);
  return it == executions_.end() ? 0 : it->second;
}

SubmitResult SubmitWithRetry(SubmissionRequest& req, const RetryPolicy& policy, Orchestrator& orch,
                             const std::vector<AttemptFault>& schedule) {
  SubmitResult res;
  auto delays = BackoffDelays(policy, std::max(0, policy.max_attempts - 1));
  for (int i = 0; i < policy.max_attempts; ++i) {
    if (i > 0) res.delays.push_back(delays[i - 1]);
    ++req.attempts;
    res.attempts = i + 1;
    AttemptFault f = i < static_cast<int>(schedule.size()) ? schedule[i] : AttemptFault{};
    if (f.endpoint_down || f.request_lost) continue;
    auto resp = orch.Deliver(req);
    if (f.duplicated) resp = orch.Deliver(req);
    if (f.ack_lost) continue;
    res.status = SubmitStatus::Accepted;
    res.existing = resp.existing;
    res.execution_id = resp.execution_id;
    return res;
  }
  res.reason = "unavailable";
  return res;
}

}  // namespace streamlab::control
