#include "trussred/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace trussred {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

bool boolean(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

const json& array(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw ParseError(where + "." + key + ": expected an array");
  return v;
}

std::vector<NodalLoad> parse_loads(const json& loads, const char* key) {
  std::vector<NodalLoad> out;
  if (!loads.contains(key)) return out;
  const std::string where = std::string("loads.") + key;
  const json& list = array(loads, key, "loads");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    out.push_back(NodalLoad{integer(list[i], "node", at), number(list[i], "fx_N", at),
                            number(list[i], "fy_N", at)});
  }
  return out;
}

json dump_loads(const std::vector<NodalLoad>& loads) {
  json out = json::array();
  for (const NodalLoad& l : loads) out.push_back({{"node", l.node}, {"fx_N", l.fx}, {"fy_N", l.fy}});
  return out;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }

  std::vector<Node> nodes;
  const json& jn = array(doc, "nodes", "instance");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string at = "nodes[" + std::to_string(i) + "]";
    nodes.push_back(Node{integer(jn[i], "id", at),
                         {number(jn[i], "x_mm", at), number(jn[i], "y_mm", at)},
                         boolean(jn[i], "fixed_x", at),
                         boolean(jn[i], "fixed_y", at)});
  }

  std::vector<std::array<int, 2>> ends;
  const json& jm = array(doc, "members", "instance");
  for (std::size_t i = 0; i < jm.size(); ++i) {
    const std::string at = "members[" + std::to_string(i) + "]";
    if (integer(jm[i], "id", at) != static_cast<int>(i)) {
      throw ParseError(at + ".id: member ids must equal their list position");
    }
    ends.push_back({integer(jm[i], "a", at), integer(jm[i], "b", at)});
  }

  const json& jl = require(doc, "loads", "instance");
  auto dead = parse_loads(jl, "dead");
  auto reference = parse_loads(jl, "reference");
  const double sigma = number(doc, "yield_stress_mpa", "instance");

  const json& ja = array(doc, "initial_areas_mm2", "instance");
  Vec areas(static_cast<Eigen::Index>(ja.size()));
  for (std::size_t i = 0; i < ja.size(); ++i) {
    if (!ja[i].is_number()) {
      throw ParseError("initial_areas_mm2[" + std::to_string(i) + "]: expected a number");
    }
    areas[static_cast<Eigen::Index>(i)] = ja[i].get<double>();
    if (!(areas[static_cast<Eigen::Index>(i)] >= 0.0)) {
      throw ParseError("initial_areas_mm2[" + std::to_string(i) + "]: must be nonnegative");
    }
  }
  const double budget = number(doc, "volume_budget_mm3", "instance");

  try {
    GroundStructure gs(std::move(nodes), std::move(ends), std::move(dead), std::move(reference),
                       sigma);
    if (areas.size() != gs.num_members()) {
      throw ParseError("initial_areas_mm2: expected " + std::to_string(gs.num_members()) +
                       " entries, got " + std::to_string(areas.size()));
    }
    return Instance{std::move(gs), Design{std::move(areas), budget}};
  } catch (const ModelError& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string dump_instance(const GroundStructure& gs, const Design& design) {
  json doc;
  json nodes = json::array();
  for (const Node& n : gs.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"x_mm", n.position[0]},
                     {"y_mm", n.position[1]},
                     {"fixed_x", n.fixed_x},
                     {"fixed_y", n.fixed_y}});
  }
  json members = json::array();
  for (const Member& m : gs.members()) {
    members.push_back({{"id", m.id}, {"a", m.end_a}, {"b", m.end_b}});
  }
  doc["nodes"] = std::move(nodes);
  doc["members"] = std::move(members);
  doc["loads"] = {{"dead", dump_loads(gs.dead_loads())},
                  {"reference", dump_loads(gs.reference_loads())}};
  doc["yield_stress_mpa"] = gs.yield_stress();
  doc["volume_budget_mm3"] = design.volume_budget;
  doc["initial_areas_mm2"] = std::vector<double>(design.areas.begin(), design.areas.end());
  // nlohmann serializes doubles with round-trip precision.
  return doc.dump(2) + "\n";
}

void save_instance(const std::filesystem::path& path, const GroundStructure& gs,
                   const Design& design) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_instance(gs, design);
}

}  // namespace trussred
