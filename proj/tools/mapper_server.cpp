// HTTP service for interactive exploration.

#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mapper/server.hpp"

namespace {
httplib::Server *g_server = nullptr;
void on_signal(int) {
  if (g_server)
    g_server->stop();
}
} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Mapper graph engine: HTTP service"};
  int port = 8800;
  std::string host = "127.0.0.1";
  std::string graphs_dir = ".", static_dir, strategy = "precomputed";
  mapper::server::Config config;
  app.add_option("--port", port, "Listen port")->capture_default_str();
  app.add_option("--host", host, "Listen address")->capture_default_str();
  app.add_option("--graphs-dir", graphs_dir, "Directory of precomputed graph files")
      ->capture_default_str();
  app.add_option("--static-dir", static_dir, "Built UI bundle served at /");
  app.add_option("--threads", config.threads, "Worker threads per mapper computation")
      ->capture_default_str();
  app.add_option("--strategy", strategy, "precomputed | on-the-fly")
      ->check(CLI::IsMember({"precomputed", "on-the-fly"}));
  app.add_option("--precompute-threshold", config.strategy.threshold)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  config.graphs_dir = graphs_dir;
  config.static_dir = static_dir;
  config.strategy.mode = mapper::parse_distance_mode(strategy);

  mapper::server::Service service(config);
  httplib::Server svr;
  service.mount(svr);
  g_server = &svr;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << host << ':' << port << '\n';
  if (!svr.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return 3;
  }
  return 0;
}
