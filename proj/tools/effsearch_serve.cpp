// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>

#include "effsearch/cli.hpp"
#include "effsearch/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Serve a finished refinement trace over HTTP", "effsearch-serve"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string trace;
  std::string cors_origin;
  app.add_option("--host", host, "Bind address")->capture_default_str();
  app.add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(0, 65535));
  app.add_option("--trace", trace, "Trace file to publish");
  app.add_option("--cors-origin", cors_origin, "Allowed browser origin");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? effsearch::cli::kExitOk : effsearch::cli::kExitUsage;
  }

  effsearch::Service service(cors_origin);
  if (!trace.empty()) {
    try {
      service.load(effsearch::publish(effsearch::read_trace(trace), effsearch::Exec::Parallel));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return effsearch::cli::kExitData;
    }
  }
  httplib::Server server;
  service.mount(server);
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return effsearch::cli::kExitData;
  }
  return effsearch::cli::kExitOk;
}
