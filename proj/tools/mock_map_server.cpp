// Standalone mock of the static-map service for offline end-to-end runs.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "tactile/dataset/fetch.hpp"

namespace {
tactile::dataset::MockMapServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serve synthetic source and tactile maps over HTTP"};
  tactile::dataset::MockMapServer::Options opt;
  int force_size = 0;
  app.add_option("--host", opt.host, "Bind address")->capture_default_str();
  app.add_option("--port", opt.port, "Port (0 picks a free one)")->capture_default_str();
  app.add_option("--fail-first", opt.fail_first, "Answer 500 to the first n requests");
  app.add_option("--quota-after", opt.quota_after, "Answer 429 after n requests");
  app.add_option("--force-size", force_size, "Serve this square size regardless of the request");
  app.add_option("--key", opt.required_key, "Require this API key");
  CLI11_PARSE(app, argc, argv);
  if (force_size > 0) opt.force_size = force_size;

  try {
    tactile::dataset::MockMapServer server(opt);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << server.base_url() << std::endl;
    server.wait();
    std::cerr << "served " << server.requests() << " requests\n";
  } catch (const std::exception& e) {
    std::cerr << "error[io]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
