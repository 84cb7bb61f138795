#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "streamlab/common/types.h"

namespace streamlab::chaos {

enum class FaultKind { KillTm, KillJm, SlowStore, NetDelay, CpuSlow, StoreDown };

std::string FaultKindName(FaultKind k);

struct Selector {
  enum class Type { None, Explicit, Random, HostingOp, All };
  Type type = Type::None;
  int tm = -1;
  std::string op;
};

struct FaultSpec {
  SimTime at = 0;
  FaultKind kind = FaultKind::KillTm;
  Selector target;
  SimTime duration = 0;  // 0: instantaneous, or permanent for state changes
  double p_slow = 0;
  SimTime added = 0;     // slow-store delay or network delay
  double factor = 1.0;   // cpu slowdown
  double capacity_factor = 1.0;
  std::string store;     // StoreDown
  std::string edge_from;  // NetDelay; empty matches every edge
  std::string edge_to;
  std::string location;  // position in the source document
};

struct FaultPlan {
  std::vector<FaultSpec> faults;  // sorted by time, stable
  std::uint64_t seed = 0;
};

// Accepts an array of specs or {"seed":..,"faults":[..]}. Throws PlanError
// with the offending location.
FaultPlan LoadPlan(const nlohmann::json& doc);
FaultPlan LoadPlanFile(const std::string& path);
nlohmann::json PlanToJson(const FaultPlan& plan);

// What the chaos module may touch. Implemented by the engine.
class FaultSurface {
 public:
  virtual ~FaultSurface() = default;
  virtual void ScheduleFault(SimTime at, std::function<void()> fn) = 0;
  virtual std::uint64_t ChaosSeed() const = 0;

  virtual int TmCount() const = 0;
  virtual std::vector<TmId> WorkerTms() const = 0;  // alive TMs hosting tasks
  virtual bool OperatorExists(const std::string& op) const = 0;
  virtual std::vector<TmId> TmsHostingOp(const std::string& op) const = 0;
  virtual bool EdgeExists(const std::string& from, const std::string& to) const = 0;
  virtual bool StoreExists(const std::string& store) const = 0;

  virtual void KillTm(TmId tm) = 0;
  virtual void KillJm() = 0;
  virtual std::pair<double, SimTime> StoreSlow() const = 0;
  virtual void SetStoreSlow(double p, SimTime delay) = 0;
  virtual bool StoreAvailable(const std::string& store) const = 0;
  virtual void SetStoreAvailable(const std::string& store, bool up) = 0;
  virtual double CpuFactor(TmId tm) const = 0;
  virtual void SetCpuFactor(TmId tm, double factor) = 0;
  virtual std::pair<SimTime, double> NetDelay(const std::string& from, const std::string& to) const = 0;
  virtual void SetNetDelay(const std::string& from, const std::string& to, SimTime added,
                           double capacity_factor) = 0;
};

// Schedules one injection per resolvable spec; returns how many were
// scheduled. Unresolvable specs are skipped with a warning.
int Arm(const FaultPlan& plan, FaultSurface& surface, std::vector<std::string>* warnings = nullptr);

}  // namespace streamlab::chaos
