#include "acc/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace acc::io {

using nlohmann::json;

Instance instance_from_json(const std::string& text) {
  Instance inst;
  try {
    const json j = json::parse(text);
    inst.config.N = j.at("N").get<int>();
    inst.config.K = j.at("K").get<int>();
    inst.config.F = j.at("F").get<int>();
    inst.config.r = j.value("r", 1);
    inst.config.field_order = j.value("field_order", 256);
    inst.virtual_users = j.value("virtual_users", false);
    for (const auto& cache : j.at("caches")) {
      std::set<SubfileId> ids;
      for (const auto& pair : cache) ids.insert({pair.at(0).get<int>(), pair.at(1).get<int>()});
      inst.placement.caches.push_back(std::move(ids));
    }
    for (const auto& r : j.at("requests")) {
      Request req;
      req.user = r.at("user").get<int>();
      req.arrival = r.at("arrival").get<int>();
      req.slack = r.at("slack").get<int>();
      req.demand = r.at("demand").get<int>();
      if (r.contains("parts")) req.parts = r.at("parts").get<std::vector<int>>();
      inst.requests.push_back(std::move(req));
    }
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed instance JSON: ") + e.what());
  }
  inst.validate();
  return inst;
}

std::string instance_to_json(const Instance& instance) {
  json j;
  j["N"] = instance.config.N;
  j["K"] = instance.config.K;
  j["F"] = instance.config.F;
  j["r"] = instance.config.r;
  j["field_order"] = instance.config.field_order;
  if (instance.virtual_users) j["virtual_users"] = true;
  json caches = json::array();
  for (const auto& cache : instance.placement.caches) {
    json list = json::array();
    for (const auto& id : cache) list.push_back({id.file, id.part});
    caches.push_back(std::move(list));
  }
  j["caches"] = std::move(caches);
  json reqs = json::array();
  for (const auto& req : instance.requests) {
    json r = {{"user", req.user}, {"arrival", req.arrival}, {"slack", req.slack},
              {"demand", req.demand}};
    if (!req.parts.empty()) r["parts"] = req.parts;
    reqs.push_back(std::move(r));
  }
  j["requests"] = std::move(reqs);
  return j.dump(2);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace acc::io
