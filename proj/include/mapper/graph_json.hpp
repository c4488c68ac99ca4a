#pragma once

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"
#include "mapper/error.hpp"
#include "mapper/nerve.hpp"

namespace mapper {

/// Canonical JSON text: no whitespace, object keys sorted, integers verbatim,
/// floating point values with 9 significant digits (%.9g). Parsing the output
/// and dumping it again yields the same bytes.
inline void dump_canonical(const nlohmann::json &j, std::string &out) {
  using value_t = nlohmann::json::value_t;
  switch (j.type()) {
  case value_t::object: {
    out += '{';
    bool first = true;
    // nlohmann::json stores objects in a std::map, so iteration is key-sorted.
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first)
        out += ',';
      first = false;
      out += nlohmann::json(it.key()).dump();
      out += ':';
      dump_canonical(it.value(), out);
    }
    out += '}';
    break;
  }
  case value_t::array: {
    out += '[';
    bool first = true;
    for (const auto &v : j) {
      if (!first)
        out += ',';
      first = false;
      dump_canonical(v, out);
    }
    out += ']';
    break;
  }
  case value_t::number_float: {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      out += "null";
    } else if (v == 0.0) {
      out += '0';
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out += buf;
    }
    break;
  }
  default:
    out += j.dump();
  }
}

inline std::string dump_canonical(const nlohmann::json &j) {
  std::string out;
  dump_canonical(j, out);
  return out;
}

inline nlohmann::json to_json(const MapperGraph &g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto &n : g.nodes) {
    nlohmann::json element = n.element.size() == 1 ? nlohmann::json(n.element[0])
                                                   : nlohmann::json(n.element);
    nlohmann::json comp = nlohmann::json::object();
    for (const auto &[col, counts] : n.composition) {
      nlohmann::json c = nlohmann::json::object();
      for (const auto &[label, count] : counts)
        c[label] = count;
      comp[col] = c;
    }
    nlohmann::json stats = nlohmann::json::object();
    for (const auto &[col, mean] : n.stats)
      stats[col] = mean;
    nodes.push_back({{"id", n.id},
                     {"element", element},
                     {"rows", n.rows},
                     {"size", n.rows.size()},
                     {"stats", stats},
                     {"composition", comp},
                     {"filter_mean", n.filter_mean}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto &e : g.edges)
    edges.push_back({{"s", e.s}, {"t", e.t}, {"w", e.w}});
  return {{"manifest", g.manifest}, {"nodes", nodes}, {"edges", edges}};
}

/// Byte-stable serialization of a graph.
inline std::string graph_to_json(const MapperGraph &g) { return dump_canonical(to_json(g)); }

namespace detail {

inline void require_keys(const nlohmann::json &obj, const std::set<std::string> &keys,
                         const char *what) {
  if (!obj.is_object())
    throw DataError(std::string(what) + " must be an object");
  std::set<std::string> have;
  for (auto it = obj.begin(); it != obj.end(); ++it)
    have.insert(it.key());
  if (have != keys)
    throw DataError(std::string(what) + " has an unexpected key set");
}

inline std::size_t as_index(const nlohmann::json &v, const char *what) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw DataError(std::string(what) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

} // namespace detail

/// Parses and validates graph JSON (exact key sets, dense ids, sorted rows,
/// canonical edges). Throws DataError on any schema violation.
inline MapperGraph parse_graph_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw DataError(std::string("malformed graph JSON: ") + e.what());
  }
  detail::require_keys(j, {"manifest", "nodes", "edges"}, "graph");
  if (!j["manifest"].is_object() || !j["nodes"].is_array() || !j["edges"].is_array())
    throw DataError("graph fields have wrong types");
  MapperGraph g;
  g.manifest = j["manifest"];
  for (const auto &jn : j["nodes"]) {
    detail::require_keys(jn, {"id", "element", "rows", "size", "stats", "composition", "filter_mean"},
                         "node");
    MapperNode n;
    n.id = detail::as_index(jn["id"], "node id");
    if (n.id != g.nodes.size())
      throw DataError("node ids must be dense and ordered");
    if (jn["element"].is_array()) {
      for (const auto &e : jn["element"])
        n.element.push_back(detail::as_index(e, "element"));
      if (n.element.size() != 2)
        throw DataError("2D element must have two indices");
    } else {
      n.element.push_back(detail::as_index(jn["element"], "element"));
    }
    if (!jn["rows"].is_array() || jn["rows"].empty())
      throw DataError("node rows must be a nonempty array");
    for (const auto &r : jn["rows"])
      n.rows.push_back(detail::as_index(r, "row"));
    if (!std::is_sorted(n.rows.begin(), n.rows.end()) ||
        std::adjacent_find(n.rows.begin(), n.rows.end()) != n.rows.end())
      throw DataError("node rows must be strictly ascending");
    if (detail::as_index(jn["size"], "size") != n.rows.size())
      throw DataError("node size does not match rows");
    if (!jn["stats"].is_object())
      throw DataError("node stats must be an object");
    for (auto it = jn["stats"].begin(); it != jn["stats"].end(); ++it) {
      if (!it.value().is_number())
        throw DataError("node stats must be numbers");
      n.stats[it.key()] = it.value().get<double>();
    }
    if (!jn["composition"].is_object())
      throw DataError("node composition must be an object");
    for (auto it = jn["composition"].begin(); it != jn["composition"].end(); ++it) {
      if (!it.value().is_object())
        throw DataError("composition entries must be objects");
      auto &counts = n.composition[it.key()];
      for (auto lt = it.value().begin(); lt != it.value().end(); ++lt)
        counts[lt.key()] = detail::as_index(lt.value(), "label count");
    }
    if (!jn["filter_mean"].is_array())
      throw DataError("filter_mean must be an array");
    for (const auto &v : jn["filter_mean"]) {
      if (!v.is_number())
        throw DataError("filter_mean must hold numbers");
      n.filter_mean.push_back(v.get<double>());
    }
    g.nodes.push_back(std::move(n));
  }
  for (const auto &je : j["edges"]) {
    detail::require_keys(je, {"s", "t", "w"}, "edge");
    MapperEdge e{detail::as_index(je["s"], "edge s"), detail::as_index(je["t"], "edge t"),
                 detail::as_index(je["w"], "edge w")};
    if (e.s >= e.t || e.t >= g.nodes.size() || e.w == 0)
      throw DataError("edge must satisfy s < t < node count and w > 0");
    if (!g.edges.empty() && std::tie(g.edges.back().s, g.edges.back().t) >= std::tie(e.s, e.t))
      throw DataError("edges must be sorted and unique");
    g.edges.push_back(e);
  }
  return g;
}

} // namespace mapper
