// Nanopublication server: serves the HTTP API, replicates from peers and
// optionally bulk-loads local files in the background.
//
//   npserver serve --config server.conf [flags]
//   npserver fsck --data-dir DIR

#include <CLI11.hpp>
#include <signal.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <map>
#include <thread>

#include "nanomesh/api.h"
#include "nanomesh/config.h"
#include "nanomesh/errors.h"
#include "nanomesh/http_server.h"
#include "nanomesh/peers.h"
#include "nanomesh/replicator.h"
#include "nanomesh/store.h"
#include "nanomesh/transport.h"

using namespace nanomesh;
namespace fs = std::filesystem;

namespace {

int serve(const ServerConfig& config, const std::vector<fs::path>& loadFiles,
          bool noSync) {
  // Block termination signals before any thread starts so only sigwait sees
  // them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  StoreOptions storeOptions;
  storeOptions.pageSize = config.pageSize;
  storeOptions.sync = !noSync;
  auto store = Store::open(config.dataDir, storeOptions);
  PeerSet peers(config.publicUrl, config.dataDir / "peers");
  peers.merge(config.peerSeeds);
  Api api(*store, peers, config.publicUrl, config.acceptsPosts);

  HttpServer server(api);
  int port = server.bind(config.listenHost(), config.listenPort());
  std::thread http([&] { server.run(); });
  server.waitUntilReady();
  StoreInfo info = store->info();
  spdlog::info("listening on {}:{} as {} (journal {}, {} nanopubs, page size {})",
               config.listenHost(), port, config.publicUrl, info.journalId, info.nanopubCount,
               info.pageSize);

  HttpTransport transport;
  ReplicatorOptions replicatorOptions;
  replicatorOptions.interval = config.loopInterval;
  Replicator replicator(*store, peers, transport, replicatorOptions);
  std::jthread replication([&](std::stop_token stop) { replicator.runLoop(stop); });

  std::jthread loader;
  if (!loadFiles.empty()) {
    loader = std::jthread([&] {
      auto start = std::chrono::steady_clock::now();
      LoadReport report = store->loadFromFiles(loadFiles);
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
      for (const auto& error : report.errors) spdlog::warn("load: {}", error);
      spdlog::info("LOAD added={} present={} errors={} ms={}", report.added,
                   report.alreadyPresent, report.errors.size(), ms);
    });
  }

  int signal = 0;
  sigwait(&signals, &signal);
  spdlog::info("received signal {}, shutting down", signal);
  replication.request_stop();
  server.stop();
  http.join();
  if (loader.joinable()) loader.join();
  replication.join();
  return 0;
}

int fsck(const fs::path& dir) {
  if (!fs::exists(dir / "journal")) {
    std::cerr << "fsck: no store at " << dir.string() << "\n";
    return 2;
  }
  auto store = Store::open(dir);
  IntegrityReport report = store->checkIntegrity();
  for (const auto& problem : report.problems) std::cout << "problem: " << problem << "\n";
  std::cout << (report.ok() ? "ok" : "damaged") << ": " << report.entries << " entries\n";
  return report.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nanopublication server", "npserver"};
  app.require_subcommand(1);

  auto* serveCmd = app.add_subcommand("serve", "Run the server");
  std::string configFile;
  std::string listen, publicUrl, dataDir, pageSize, acceptsPosts, loopInterval, logLevel;
  std::vector<std::string> seeds;
  std::string logFile;
  std::vector<fs::path> loadFiles;
  bool noSync = false;
  serveCmd->add_option("--config", configFile, "Config file with `key: value` lines");
  serveCmd->add_option("--listen", listen, "host:port to listen on");
  serveCmd->add_option("--public-url", publicUrl, "URL under which peers reach this server");
  serveCmd->add_option("--data-dir", dataDir, "Store directory");
  serveCmd->add_option("--page-size", pageSize, "Journal page size for a new store");
  serveCmd->add_option("--accepts-posts", acceptsPosts, "true or false");
  serveCmd->add_option("--peer", seeds, "Peer to replicate from (repeatable)");
  serveCmd->add_option("--loop-interval", loopInterval, "Seconds between replication rounds");
  serveCmd->add_option("--log-level", logLevel, "trace, debug, info, warn or error");
  serveCmd->add_option("--log-file", logFile, "Log to this file instead of stderr");
  serveCmd->add_option("--load", loadFiles, "Files to bulk-load in the background")
      ->check(CLI::ExistingFile);
  serveCmd->add_flag("--no-sync", noSync, "Skip fsync (test setups only)");

  auto* fsckCmd = app.add_subcommand("fsck", "Check a store directory and exit");
  std::string fsckDir;
  fsckCmd->add_option("--data-dir", fsckDir, "Store directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fsckCmd) {
      initLogging("warn");
      return fsck(fsckDir);
    }
    std::map<std::string, std::string> overrides;
    auto set = [&](const char* key, const std::string& value) {
      if (!value.empty()) overrides[key] = value;
    };
    set("listen-address", listen);
    set("public-url", publicUrl);
    set("data-dir", dataDir);
    set("page-size", pageSize);
    set("accepts-posts", acceptsPosts);
    set("loop-interval", loopInterval);
    set("log-level", logLevel);
    if (!seeds.empty()) {
      std::string joined;
      for (const auto& s : seeds) joined += s + " ";
      overrides["peer-seeds"] = joined;
    }
    std::optional<fs::path> file;
    if (!configFile.empty()) file = configFile;
    ServerConfig config = loadConfig(file, processEnv, overrides);
    std::optional<fs::path> log;
    if (!logFile.empty()) log = logFile;
    initLogging(config.logLevel, log);
    return serve(config, loadFiles, noSync);
  } catch (const ConfigError& err) {
    std::cerr << "npserver: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "npserver: " << err.what() << "\n";
    spdlog::critical("{}", err.what());
    return 2;
  }
}
