#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "mapper/analysis.hpp"
#include "mapper/dataset.hpp"
#include "mapper/error.hpp"
#include "mapper/graph_json.hpp"
#include "mapper/graph_query.hpp"
#include "mapper/pipeline.hpp"

namespace mapper::server {

using nlohmann::json;

inline constexpr std::size_t kUploadCap = 512ULL << 20;

struct Config {
  std::filesystem::path graphs_dir = ".";
  std::filesystem::path static_dir; // empty: no static files
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  DistanceStrategy strategy;
};

/// HTTP status plus JSON {"error": message}.
struct HttpError : std::runtime_error {
  int status;
  HttpError(int s, const std::string &msg) : std::runtime_error(msg), status(s) {}
};

/// In-memory datasets and their active graphs, plus the HTTP routes over
/// them. Readers take shared_ptr snapshots, so a request sees either the old
/// or the new graph, never a partial one.
class Service {
public:
  explicit Service(Config config) : config_(std::move(config)) {}

  void mount(httplib::Server &svr) {
    svr.set_payload_max_length(kUploadCap);
    svr.Post("/api/dataset", wrap([this](const httplib::Request &rq) { return upload(rq); }));
    svr.Post("/api/mapper", wrap([this](const httplib::Request &rq) { return mapper(rq); }));
    svr.Post("/api/select", wrap([this](const httplib::Request &rq) { return select(rq); }));
    svr.Post("/api/analysis", wrap([this](const httplib::Request &rq) { return analysis(rq); }));
    svr.Get("/api/graphs", wrap([this](const httplib::Request &) { return list_graphs(); }));
    svr.Post("/api/graphs/load", wrap([this](const httplib::Request &rq) { return load_graph(rq); }));
    if (!config_.static_dir.empty() && std::filesystem::is_directory(config_.static_dir))
      svr.set_mount_point("/", config_.static_dir.string());
  }

private:
  struct Dataset {
    std::shared_ptr<const PointCloud> cloud;
    WrangleReport report;
    std::mutex mu; // guards the fields below
    std::shared_ptr<const MapperGraph> graph;
    std::shared_ptr<const std::string> graph_json;
    std::optional<std::stop_source> inflight;
    std::uint64_t generation = 0;
  };

  using Handler = std::function<std::string(const httplib::Request &)>;

  static httplib::Server::Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request &rq, httplib::Response &res) {
      auto fail = [&](int status, const std::string &msg) {
        res.status = status;
        res.set_content(json{{"error", msg}}.dump(), "application/json");
      };
      try {
        res.set_content(h(rq), "application/json");
        res.status = 200;
      } catch (const HttpError &e) {
        fail(e.status, e.what());
      } catch (const ParamError &e) {
        fail(422, e.what());
      } catch (const DataError &e) {
        fail(422, e.what());
      } catch (const Cancelled &) {
        fail(409, "superseded by a newer mapper request");
      } catch (const json::exception &e) {
        fail(400, std::string("bad JSON: ") + e.what());
      } catch (const std::exception &e) {
        fail(500, e.what());
      }
    };
  }

  static json parse_body(const httplib::Request &rq) {
    try {
      auto j = json::parse(rq.body);
      if (!j.is_object())
        throw HttpError(400, "request body must be a JSON object");
      return j;
    } catch (const json::parse_error &e) {
      throw HttpError(400, std::string("malformed JSON body: ") + e.what());
    }
  }

  std::shared_ptr<Dataset> dataset(const json &body) {
    if (!body.contains("dataset_id") || !body["dataset_id"].is_number_integer())
      throw ParamError("dataset_id", "integer dataset_id required");
    const auto id = body["dataset_id"].get<std::int64_t>();
    std::lock_guard lock(mu_);
    auto it = datasets_.find(id);
    if (it == datasets_.end())
      throw HttpError(404, "unknown dataset " + std::to_string(id));
    return it->second;
  }

  std::string upload(const httplib::Request &rq) {
    if (rq.body.empty())
      throw HttpError(400, "empty body");
    Wrangled w = [&] {
      try {
        return wrangle(parse_csv(rq.body));
      } catch (const DataError &e) {
        throw HttpError(400, e.what());
      }
    }();
    auto ds = std::make_shared<Dataset>();
    ds->cloud = std::make_shared<const PointCloud>(std::move(w.cloud));
    ds->report = w.report;
    std::int64_t id;
    {
      std::lock_guard lock(mu_);
      id = next_id_++;
      datasets_[id] = ds;
    }
    json cols = json::array();
    for (const auto &c : ds->cloud->columns())
      cols.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"index", c.index}});
    return json{{"dataset_id", id},
                {"columns", cols},
                {"n_rows", ds->cloud->rows()},
                {"wrangle_report", to_json(ds->report)}}
        .dump();
  }

  template <class T> static std::vector<T> scalar_or_list(const json &v, const char *field) {
    std::vector<T> out;
    auto one = [&](const json &x) {
      if (!x.is_number())
        throw ParamError(field, "must be a number or a list of numbers");
      if constexpr (std::is_integral_v<T>) {
        if (!x.is_number_integer() || x.get<std::int64_t>() < 0)
          throw ParamError(field, "must be a non-negative integer");
      }
      out.push_back(x.get<T>());
    };
    if (v.is_array())
      for (const auto &x : v)
        one(x);
    else
      one(v);
    return out;
  }

  static MapperParams mapper_params(const json &b) {
    MapperParams mp;
    if (b.contains("norm")) {
      if (!b["norm"].is_string())
        throw ParamError("norm", "must be a string");
      mp.norm = parse_normalization(b["norm"].get<std::string>());
    }
    if (!b.contains("filters"))
      throw ParamError("filters", "required");
    const auto &f = b["filters"];
    if (f.is_array())
      for (const auto &x : f)
        mp.filters.push_back(filter_from_json(x));
    else
      mp.filters.push_back(filter_from_json(f));
    if (!b.contains("n"))
      throw ParamError("n", "required");
    mp.n = scalar_or_list<std::size_t>(b["n"], "n");
    if (!b.contains("p"))
      throw ParamError("p", "required");
    mp.p = scalar_or_list<double>(b["p"], "p");
    if (!b.contains("eps") || !b["eps"].is_number())
      throw ParamError("eps", "numeric eps required");
    mp.eps = b["eps"].get<double>();
    if (b.contains("min_pts")) {
      if (!b["min_pts"].is_number_integer() || b["min_pts"].get<std::int64_t>() < 1)
        throw ParamError("min_pts", "must be a positive integer");
      mp.min_pts = b["min_pts"].get<std::size_t>();
    }
    validate(mp);
    return mp;
  }

  std::string mapper(const httplib::Request &rq) {
    const auto body = parse_body(rq);
    auto ds = dataset(body);
    const auto mp = mapper_params(body);

    std::stop_source source;
    std::uint64_t gen;
    {
      std::lock_guard lock(ds->mu);
      if (ds->inflight)
        ds->inflight->request_stop();
      ds->inflight = source;
      gen = ++ds->generation;
    }
    ExecutionOptions exec;
    exec.strategy = config_.strategy;
    exec.threads = config_.threads;
    exec.stop = source.get_token();
    MapperRun run;
    try {
      run = run_mapper(*ds->cloud, mp, exec);
    } catch (...) {
      std::lock_guard lock(ds->mu);
      if (ds->generation == gen)
        ds->inflight.reset();
      throw;
    }
    auto graph = std::make_shared<const MapperGraph>(std::move(run.graph));
    auto text = std::make_shared<const std::string>(std::move(run.json));
    {
      std::lock_guard lock(ds->mu);
      if (ds->generation != gen)
        throw Cancelled();
      ds->inflight.reset();
      ds->graph = graph;
      ds->graph_json = text;
    }
    return *text;
  }

  static std::shared_ptr<const MapperGraph> active_graph(Dataset &ds) {
    std::lock_guard lock(ds.mu);
    if (!ds.graph)
      throw HttpError(404, "no graph computed or loaded for this dataset");
    return ds.graph;
  }

  static NodeId node_arg(const json &args, const char *key) {
    if (!args.contains(key) || !args[key].is_number_integer() || args[key].get<std::int64_t>() < 0)
      throw ParamError(key, "node id required");
    return args[key].get<NodeId>();
  }

  static std::vector<NodeId> node_list(const json &args, const char *key) {
    if (!args.contains(key) || !args[key].is_array())
      throw ParamError(key, "list of node ids required");
    std::vector<NodeId> ids;
    for (const auto &x : args[key]) {
      if (!x.is_number_integer() || x.get<std::int64_t>() < 0)
        throw ParamError(key, "node ids must be non-negative integers");
      ids.push_back(x.get<NodeId>());
    }
    return ids;
  }

  std::string select(const httplib::Request &rq) {
    const auto body = parse_body(rq);
    auto ds = dataset(body);
    auto g = active_graph(*ds);
    if (!body.contains("mode") || !body["mode"].is_string())
      throw ParamError("mode", "mode must be nodes, cluster or path");
    const auto mode = body["mode"].get<std::string>();
    const json args = body.contains("args") ? body["args"] : json::object();
    if (!args.is_object())
      throw ParamError("args", "must be an object");

    Selection sel;
    json path = nullptr;
    if (mode == "nodes") {
      sel = make_selection(*g, node_list(args, "ids"), SelectionMode::nodes);
    } else if (mode == "cluster") {
      sel = connected_component(*g, node_arg(args, "seed"));
    } else if (mode == "path") {
      std::optional<std::vector<NodeId>> p;
      if (args.contains("path"))
        p = extend_path(*g, node_list(args, "path"), node_arg(args, "end"));
      else
        p = shortest_path(*g, node_arg(args, "start"), node_arg(args, "end"));
      sel.mode = SelectionMode::path;
      if (p) {
        path = *p;
        sel = make_selection(*g, *p, SelectionMode::path);
      }
    } else {
      throw ParamError("mode", "unknown mode '" + mode + "'");
    }
    const auto details = selection_details(*g, sel, *ds->cloud);
    json nodes = json::array();
    for (const auto *n : details.nodes) {
      json stats = json::object();
      for (const auto &[c, v] : n->stats)
        stats[c] = v;
      nodes.push_back({{"id", n->id}, {"size", n->rows.size()}, {"stats", stats}});
    }
    json labels = json::object();
    for (const auto &[c, counts] : details.labels) {
      json m = json::object();
      for (const auto &[l, k] : counts)
        m[l] = k;
      labels[c] = m;
    }
    json out = {{"mode", to_string(sel.mode)},
                {"node_ids", sel.node_ids},
                {"nodes", nodes},
                {"rows", details.rows},
                {"labels", labels}};
    if (mode == "path")
      out["path"] = path;
    return dump_canonical(out);
  }

  std::string analysis(const httplib::Request &rq) {
    const auto body = parse_body(rq);
    auto ds = dataset(body);
    if (!body.contains("kind") || !body["kind"].is_string())
      throw ParamError("kind", "kind must be regression or pca");
    const auto kind = body["kind"].get<std::string>();
    std::vector<std::size_t> rows;
    if (body.contains("rows") && !body["rows"].is_null())
      rows = node_list(body, "rows");
    const json params = body.contains("params") ? body["params"] : json::object();
    if (!params.is_object())
      throw ParamError("params", "must be an object");
    auto strings = [&](const char *key) {
      std::vector<std::string> out;
      if (!params.contains(key))
        return out;
      if (!params[key].is_array())
        throw ParamError(key, "must be a list of column names");
      for (const auto &x : params[key]) {
        if (!x.is_string())
          throw ParamError(key, "must be a list of column names");
        out.push_back(x.get<std::string>());
      }
      return out;
    };
    if (kind == "regression") {
      if (!params.contains("dependent") || !params["dependent"].is_string())
        throw ParamError("dependent", "column name required");
      auto r = linear_regression(*ds->cloud, rows, params["dependent"].get<std::string>(),
                                 strings("independents"));
      return dump_canonical(to_json(r));
    }
    if (kind == "pca") {
      std::size_t k = 2;
      if (params.contains("k")) {
        if (!params["k"].is_number_integer() || params["k"].get<std::int64_t>() < 1)
          throw ParamError("k", "must be a positive integer");
        k = params["k"].get<std::size_t>();
      }
      auto r = pca(*ds->cloud, rows, k, strings("columns"));
      return dump_canonical(to_json(r));
    }
    throw ParamError("kind", "unknown analysis kind '" + kind + "'");
  }

  std::string list_graphs() const {
    json files = json::array();
    std::vector<std::string> names;
    std::error_code ec;
    if (std::filesystem::is_directory(config_.graphs_dir, ec)) {
      for (auto it = std::filesystem::recursive_directory_iterator(config_.graphs_dir, ec);
           it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
        if (ec)
          break;
        if (it->is_regular_file() && it->path().extension() == ".json" &&
            it->path().filename() != "manifest.json")
          names.push_back(std::filesystem::relative(it->path(), config_.graphs_dir).generic_string());
      }
    }
    std::sort(names.begin(), names.end());
    for (auto &n : names)
      files.push_back(n);
    return json{{"graphs", files}}.dump();
  }

  /// Resolves a client path inside graphs_dir; 403 on any escape attempt.
  std::filesystem::path resolve_graph_path(const std::string &rel) const {
    const std::filesystem::path p(rel);
    if (rel.empty() || p.is_absolute() || p.has_root_name() || p.has_root_directory())
      throw HttpError(403, "path must be relative to the graphs directory");
    for (const auto &part : p)
      if (part == "..")
        throw HttpError(403, "path escapes the graphs directory");
    std::error_code ec;
    const auto root = std::filesystem::weakly_canonical(config_.graphs_dir, ec);
    const auto full = std::filesystem::weakly_canonical(config_.graphs_dir / p, ec);
    auto [r, f] = std::mismatch(root.begin(), root.end(), full.begin(), full.end());
    if (r != root.end())
      throw HttpError(403, "path escapes the graphs directory");
    return full;
  }

  std::string load_graph(const httplib::Request &rq) {
    const auto body = parse_body(rq);
    if (!body.contains("path") || !body["path"].is_string())
      throw ParamError("path", "string path required");
    const auto full = resolve_graph_path(body["path"].get<std::string>());
    if (!std::filesystem::is_regular_file(full))
      throw HttpError(404, "no such graph file");
    std::ifstream in(full, std::ios::binary);
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    auto graph = std::make_shared<const MapperGraph>(parse_graph_json(text));
    if (body.contains("dataset_id")) {
      auto ds = dataset(body);
      for (const auto &n : graph->nodes)
        if (n.rows.back() >= ds->cloud->rows())
          throw DataError("graph rows exceed the dataset's row count");
      std::lock_guard lock(ds->mu);
      if (ds->inflight)
        ds->inflight->request_stop();
      ds->inflight.reset();
      ++ds->generation;
      ds->graph = graph;
      ds->graph_json = std::make_shared<const std::string>(text);
    }
    return text;
  }

  Config config_;
  std::mutex mu_;
  std::map<std::int64_t, std::shared_ptr<Dataset>> datasets_;
  std::int64_t next_id_ = 1;
};

} // namespace mapper::server
