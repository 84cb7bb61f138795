#include "streamlab/graph/job_file.h"

#include <cmath>
#include <fstream>

namespace streamlab::graph {

LogicalGraph LogicalGraphFromJson(const nlohmann::json& doc) {
  LogicalGraph g;
  try {
    for (const auto& op : doc.at("operators")) {
      OperatorSpec spec;
      spec.id = op.at("id").get<std::string>();
      spec.kind = ParseKind(op.at("kind").get<std::string>());
      spec.parallelism = op.value("parallelism", 1);
      spec.selectivity = op.value("selectivity", 1.0);
      if (op.contains("service_us")) {
        spec.service_time = static_cast<SimTime>(std::llround(op["service_us"].get<double>() * kMicrosecond));
      }
      g.operators.push_back(spec);
    }
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        EdgeSpec edge;
        edge.from = e.at("from").get<std::string>();
        edge.to = e.at("to").get<std::string>();
        edge.strategy = shuffle::ParseStrategy(e.value("strategy", std::string("rebalance")),
                                               e.value("params", nlohmann::json::object()));
        g.edges.push_back(edge);
      }
    }
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("job definition: ") + err.what());
  }
  return g;
}

nlohmann::json LogicalGraphToJson(const LogicalGraph& g) {
  nlohmann::json doc;
  doc["operators"] = nlohmann::json::array();
  for (const auto& op : g.operators) {
    nlohmann::json o{{"id", op.id},
                     {"kind", KindName(op.kind)},
                     {"parallelism", op.parallelism},
                     {"selectivity", op.selectivity}};
    if (op.service_time > 0) o["service_us"] = static_cast<double>(op.service_time) / kMicrosecond;
    doc["operators"].push_back(o);
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges) {
    doc["edges"].push_back({{"from", e.from},
                            {"to", e.to},
                            {"strategy", shuffle::StrategyName(e.strategy.kind)},
                            {"params", shuffle::StrategyParams(e.strategy)}});
  }
  return doc;
}

LogicalGraph LoadJobFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open job file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError("job file '" + path + "': " + err.what());
  }
  return LogicalGraphFromJson(doc);
}

}  // namespace streamlab::graph
