// Desk-scale experiments:
//
//   harness replicate --servers N --nanopubs M --seed S --out DIR
//   harness load --clients N --duration S --target URL --out DIR

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "nanomesh/config.h"
#include "nanomesh/harness.h"
#include "nanomesh/wire.h"

using namespace nanomesh;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Replication and retrieval-load experiments", "harness"};
  app.require_subcommand(1);
  std::string logLevel = "info";
  app.add_option("--log-level", logLevel, "trace, debug, info, warn or error");

  auto* replicate = app.add_subcommand("replicate", "Bulk-load a corpus and time its spread");
  std::size_t servers = 3;
  std::size_t nanopubs = 10000;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<std::size_t> assign;
  std::size_t pageSize = kDefaultPageSize;
  double loopInterval = 1.0;
  int timeout = 300;
  std::string serverBinary;
  bool noSync = false;
  replicate->add_option("--servers", servers, "Number of server processes")->check(CLI::Range(2, 64));
  replicate->add_option("--nanopubs", nanopubs, "Corpus size, all loaded at the first server");
  replicate->add_option("--assign", assign,
                        "Per-server load sizes, comma separated (overrides --nanopubs)")
      ->delimiter(',');
  replicate->add_option("--seed", seed, "Corpus seed");
  replicate->add_option("--page-size", pageSize, "Journal page size");
  replicate->add_option("--loop-interval", loopInterval, "Replication interval in seconds");
  replicate->add_option("--timeout", timeout, "Seconds to wait for convergence");
  replicate->add_option("--server-binary", serverBinary, "npserver executable");
  replicate->add_flag("--no-sync", noSync, "Run the servers without fsync");
  replicate->add_option("--out", out, "Output directory")->required();

  auto* load = app.add_subcommand("load", "Ramp up clients against one server");
  std::size_t clients = 100;
  double duration = 300;
  double fetchProbability = 0.10;
  std::string target;
  std::string loadOut;
  load->add_option("--clients", clients, "Clients at the end of the ramp")->check(CLI::PositiveNumber);
  load->add_option("--duration", duration, "Ramp duration in seconds")->check(CLI::PositiveNumber);
  load->add_option("--fetch-probability", fetchProbability, "Chance of fetching each page entry")
      ->check(CLI::Range(0.0, 1.0));
  load->add_option("--seed", seed, "Client seed");
  load->add_option("--target", target, "Server URL")->required();
  load->add_option("--out", loadOut, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  initLogging(logLevel);

  try {
    RunMetrics metrics;
    fs::path outDir;
    if (*replicate) {
      NetworkPlan plan;
      plan.network.serverCount = servers;
      plan.network.pageSize = pageSize;
      plan.network.loopInterval = std::chrono::milliseconds(static_cast<long long>(loopInterval * 1000));
      plan.network.fsync = !noSync;
      plan.network.serverBinary =
          serverBinary.empty() ? selfDirectory() / "npserver" : fs::path(serverBinary);
      outDir = out;
      plan.network.workDir = outDir / "network";
      plan.corpusSeed = seed;
      plan.timeout = std::chrono::seconds(timeout);
      if (assign.empty()) {
        plan.assignments.assign(servers, 0);
        plan.assignments[0] = nanopubs;
      } else {
        plan.assignments = assign;
        plan.network.serverCount = assign.size();
      }
      metrics = runReplicationExperiment(plan);
    } else {
      auto url = normalizeServerUrl(target);
      if (!url) {
        std::cerr << "harness: not a server URL: " << target << "\n";
        return 1;
      }
      LoadPlan plan;
      plan.targetServer = *url;
      plan.maxClients = clients;
      plan.rampDuration = std::chrono::milliseconds(static_cast<long long>(duration * 1000));
      plan.fetchProbability = fetchProbability;
      plan.seed = seed;
      outDir = loadOut;
      metrics = runLoadExperiment(plan);
    }
    reportRun(metrics, outDir);
    std::ifstream summary(outDir / "summary.txt");
    std::cout << summary.rdbuf();
    return 0;
  } catch (const std::exception& err) {
    std::cerr << "harness: " << err.what() << "\n";
    return 2;
  }
}
