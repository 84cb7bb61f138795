#include "streamlab/chaos/fault_plan.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include "streamlab/common/duration.h"
#include "streamlab/common/random.h"

namespace streamlab::chaos {

std::string FaultKindName(FaultKind k) {
  switch (k) {
    case FaultKind::KillTm: return "kill_tm";
    case FaultKind::KillJm: return "kill_jm";
    case FaultKind::SlowStore: return "slow_store";
    case FaultKind::NetDelay: return "net_delay";
    case FaultKind::CpuSlow: return "cpu_slow";
    case FaultKind::StoreDown: return "store_down";
  }
  return "?";
}

namespace {

FaultKind ParseKind(const std::string& text, const std::string& loc) {
  std::string k;
  for (char c : text) {
    if (c != '_') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "killtm") return FaultKind::KillTm;
  if (k == "killjm") return FaultKind::KillJm;
  if (k == "slowstore") return FaultKind::SlowStore;
  if (k == "netdelay") return FaultKind::NetDelay;
  if (k == "cpuslow") return FaultKind::CpuSlow;
  if (k == "storedown") return FaultKind::StoreDown;
  throw PlanError(loc, "unknown fault kind '" + text + "'");
}

SimTime ParseTime(const nlohmann::json& v, const std::string& loc, const char* field) {
  SimTime t = 0;
  try {
    if (v.is_string()) {
      t = ParseDuration(v.get<std::string>());
    } else if (v.is_number()) {
      t = static_cast<SimTime>(std::llround(v.get<double>() * kSecond));
    } else {
      throw PlanError(loc, std::string(field) + " must be a number or duration string");
    }
  } catch (const ConfigError& err) {
    throw PlanError(loc, err.what());
  }
  if (t < 0) throw PlanError(loc, std::string(field) + " must be >= 0");
  return t;
}

Selector ParseSelector(const nlohmann::json& v, const std::string& loc) {
  Selector s;
  if (v.is_null()) return s;
  if (v.is_string()) {
    auto text = v.get<std::string>();
    if (text == "random") {
      s.type = Selector::Type::Random;
    } else if (text == "all") {
      s.type = Selector::Type::All;
    } else {
      throw PlanError(loc, "unknown target selector '" + text + "'");
    }
    return s;
  }
  if (v.is_number_integer()) {
    s.type = Selector::Type::Explicit;
    s.tm = v.get<int>();
    return s;
  }
  if (v.is_object()) {
    if (v.contains("tm")) {
      if (v["tm"].is_string() && v["tm"].get<std::string>() == "random") {
        s.type = Selector::Type::Random;
      } else {
        s.type = Selector::Type::Explicit;
        s.tm = v["tm"].get<int>();
      }
      return s;
    }
    if (v.contains("hosting_op")) {
      s.type = Selector::Type::HostingOp;
      s.op = v["hosting_op"].get<std::string>();
      return s;
    }
  }
  throw PlanError(loc, "malformed target selector");
}

}  // namespace

FaultPlan LoadPlan(const nlohmann::json& doc) {
  FaultPlan plan;
  const nlohmann::json* list = &doc;
  std::string prefix = "$";
  if (doc.is_object()) {
    plan.seed = doc.value("seed", std::uint64_t{0});
    if (!doc.contains("faults")) throw PlanError("$", "missing 'faults'");
    list = &doc["faults"];
    prefix = "$.faults";
  }
  if (!list->is_array()) throw PlanError(prefix, "fault plan must be an array");
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& f = (*list)[i];
    std::string loc = prefix + "[" + std::to_string(i) + "]";
    if (!f.is_object()) throw PlanError(loc, "fault spec must be an object");
    try {
      FaultSpec s;
      s.location = loc;
      if (!f.contains("at")) throw PlanError(loc, "missing 'at'");
      s.at = ParseTime(f["at"], loc, "at");
      if (!f.contains("kind")) throw PlanError(loc, "missing 'kind'");
      s.kind = ParseKind(f["kind"].get<std::string>(), loc);
      s.target = ParseSelector(f.value("target", nlohmann::json()), loc);
      if (f.contains("duration")) s.duration = ParseTime(f["duration"], loc, "duration");
      switch (s.kind) {
        case FaultKind::KillTm:
          if (s.target.type == Selector::Type::None) throw PlanError(loc, "kill_tm needs a target");
          break;
        case FaultKind::KillJm:
          break;
        case FaultKind::SlowStore:
          s.p_slow = f.value("p_slow", 0.0);
          if (s.p_slow < 0 || s.p_slow > 1) throw PlanError(loc, "p_slow must be in [0,1]");
          if (f.contains("delay")) s.added = ParseTime(f["delay"], loc, "delay");
          break;
        case FaultKind::NetDelay:
          if (f.contains("added")) s.added = ParseTime(f["added"], loc, "added");
          s.capacity_factor = f.value("capacity_factor", 1.0);
          if (s.capacity_factor <= 0 || s.capacity_factor > 1) {
            throw PlanError(loc, "capacity_factor must be in (0,1]");
          }
          if (f.contains("edge")) {
            s.edge_from = f["edge"].at("from").get<std::string>();
            s.edge_to = f["edge"].at("to").get<std::string>();
          }
          break;
        case FaultKind::CpuSlow:
          s.factor = f.value("factor", 1.0);
          if (!(s.factor > 0)) throw PlanError(loc, "factor must be > 0");
          if (s.target.type == Selector::Type::None) throw PlanError(loc, "cpu_slow needs a target");
          break;
        case FaultKind::StoreDown:
          s.store = f.value("store", std::string("hdfs"));
          break;
      }
      plan.faults.push_back(s);
    } catch (const nlohmann::json::exception& err) {
      throw PlanError(loc, err.what());
    }
  }
  std::stable_sort(plan.faults.begin(), plan.faults.end(),
                   [](const FaultSpec& a, const FaultSpec& b) { return a.at < b.at; });
  return plan;
}

FaultPlan LoadPlanFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fault plan '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& err) {
    throw PlanError(path, err.what());
  }
  return LoadPlan(doc);
}

nlohmann::json PlanToJson(const FaultPlan& plan) {
  nlohmann::json faults = nlohmann::json::array();
  for (const auto& f : plan.faults) {
    nlohmann::json j{{"at", FormatDuration(f.at)}, {"kind", FaultKindName(f.kind)}};
    switch (f.target.type) {
      case Selector::Type::Explicit: j["target"] = {{"tm", f.target.tm}}; break;
      case Selector::Type::Random: j["target"] = "random"; break;
      case Selector::Type::HostingOp: j["target"] = {{"hosting_op", f.target.op}}; break;
      case Selector::Type::All: j["target"] = "all"; break;
      case Selector::Type::None: break;
    }
    if (f.duration > 0) j["duration"] = FormatDuration(f.duration);
    switch (f.kind) {
      case FaultKind::SlowStore:
        j["p_slow"] = f.p_slow;
        j["delay"] = FormatDuration(f.added);
        break;
      case FaultKind::NetDelay:
        j["added"] = FormatDuration(f.added);
        j["capacity_factor"] = f.capacity_factor;
        if (!f.edge_from.empty()) j["edge"] = {{"from", f.edge_from}, {"to", f.edge_to}};
        break;
      case FaultKind::CpuSlow: j["factor"] = f.factor; break;
      case FaultKind::StoreDown: j["store"] = f.store; break;
      default: break;
    }
    faults.push_back(j);
  }
  return {{"seed", plan.seed}, {"faults", faults}};
}

namespace {

// Resolves a TM selector at fire time.
std::vector<TmId> Resolve(const Selector& sel, FaultSurface& s, std::mt19937_64& rng) {
  switch (sel.type) {
    case Selector::Type::Explicit: return {TmId{sel.tm}};
    case Selector::Type::Random: {
      auto tms = s.WorkerTms();
      if (tms.empty()) return {};
      return {tms[rng() % tms.size()]};
    }
    case Selector::Type::HostingOp: return s.TmsHostingOp(sel.op);
    case Selector::Type::All: return s.WorkerTms();
    case Selector::Type::None: return {};
  }
  return {};
}

}  // namespace

int Arm(const FaultPlan& plan, FaultSurface& surface, std::vector<std::string>* warnings) {
  auto warn = [&](const FaultSpec& f, const std::string& msg) {
    if (warnings) warnings->push_back(f.location + ": " + msg + "; skipped");
  };
  auto rng = std::make_shared<std::mt19937_64>(Mix64(surface.ChaosSeed() ^ Mix64(plan.seed)));
  FaultSurface* s = &surface;
  int scheduled = 0;
  for (const auto& f : plan.faults) {
    if (f.target.type == Selector::Type::Explicit && (f.target.tm < 0 || f.target.tm >= s->TmCount())) {
      warn(f, "no TM " + std::to_string(f.target.tm));
      continue;
    }
    if (f.target.type == Selector::Type::HostingOp && !s->OperatorExists(f.target.op)) {
      warn(f, "no operator '" + f.target.op + "'");
      continue;
    }
    if (f.kind == FaultKind::StoreDown && !s->StoreExists(f.store)) {
      warn(f, "no store '" + f.store + "'");
      continue;
    }
    if (f.kind == FaultKind::NetDelay && !f.edge_from.empty() && !s->EdgeExists(f.edge_from, f.edge_to)) {
      warn(f, "no edge " + f.edge_from + "->" + f.edge_to);
      continue;
    }
    switch (f.kind) {
      case FaultKind::KillTm:
        s->ScheduleFault(f.at, [s, f, rng] {
          for (TmId tm : Resolve(f.target, *s, *rng)) s->KillTm(tm);
        });
        break;
      case FaultKind::KillJm:
        s->ScheduleFault(f.at, [s] { s->KillJm(); });
        break;
      case FaultKind::SlowStore:
        s->ScheduleFault(f.at, [s, f] {
          auto prior = s->StoreSlow();
          s->SetStoreSlow(f.p_slow, f.added);
          if (f.duration > 0) {
            s->ScheduleFault(f.at + f.duration, [s, prior] { s->SetStoreSlow(prior.first, prior.second); });
          }
        });
        break;
      case FaultKind::NetDelay:
        s->ScheduleFault(f.at, [s, f] {
          auto prior = s->NetDelay(f.edge_from, f.edge_to);
          s->SetNetDelay(f.edge_from, f.edge_to, f.added, f.capacity_factor);
          if (f.duration > 0) {
            s->ScheduleFault(f.at + f.duration, [s, f, prior] {
              s->SetNetDelay(f.edge_from, f.edge_to, prior.first, prior.second);
            });
          }
        });
        break;
      case FaultKind::CpuSlow:
        s->ScheduleFault(f.at, [s, f, rng] {
          for (TmId tm : Resolve(f.target, *s, *rng)) {
            double prior = s->CpuFactor(tm);
            s->SetCpuFactor(tm, prior * f.factor);
            if (f.duration > 0) {
              s->ScheduleFault(f.at + f.duration, [s, tm, prior] { s->SetCpuFactor(tm, prior); });
            }
          }
        });
        break;
      case FaultKind::StoreDown:
        s->ScheduleFault(f.at, [s, f] {
          bool prior = s->StoreAvailable(f.store);
          s->SetStoreAvailable(f.store, false);
          if (f.duration > 0) {
            s->ScheduleFault(f.at + f.duration, [s, f, prior] { s->SetStoreAvailable(f.store, prior); });
          }
        });
        break;
    }
    ++scheduled;
  }
  return scheduled;
}

}  // namespace streamlab::chaos
