#pragma once

#include <string>

#include <json.hpp>

#include "streamlab/graph/graph.h"

namespace streamlab::graph {

// {operators:[{id,kind,parallelism,selectivity,service_us?}],
//  edges:[{from,to,strategy,params}]}
LogicalGraph LogicalGraphFromJson(const nlohmann::json& doc);
nlohmann::json LogicalGraphToJson(const LogicalGraph& g);
LogicalGraph LoadJobFile(const std::string& path);

}  // namespace streamlab::graph
