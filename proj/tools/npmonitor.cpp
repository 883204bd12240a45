// Probes servers periodically and appends the results to a CSV log.
//
//   npmonitor --servers FILE [--interval S] [--out PATH] [--rounds N]
//   npmonitor --summarize PATH

#include <CLI11.hpp>
#include <signal.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <thread>

#include "nanomesh/config.h"
#include "nanomesh/errors.h"
#include "nanomesh/monitor.h"

using namespace nanomesh;
namespace fs = std::filesystem;

namespace {

void printSummary(const std::vector<ProbeResult>& log) {
  std::cout << "server,probes,p50_ms,p99_ms,max_ms,success_rate,verify_failures,errors\n";
  for (const auto& [server, s] : summarize(log)) {
    std::cout << server << "," << s.probes << "," << csv::formatMillis(s.p50) << ","
              << csv::formatMillis(s.p99) << "," << csv::formatMillis(s.max) << ","
              << s.successRate << "," << s.verifyFailures << "," << s.errors << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Server health monitor", "npmonitor"};
  std::string serversFile;
  double interval = 60;
  std::string out;
  std::size_t rounds = 0;
  std::string summarizePath;
  std::string logLevel = "warn";
  auto* serversOption =
      app.add_option("--servers", serversFile, "File with one server URL per line");
  app.add_option("--interval", interval, "Seconds between rounds")->check(CLI::Range(0.001, 1e9));
  app.add_option("--out", out, "CSV log to append to (default: standard output)");
  app.add_option("--rounds", rounds, "Rounds to run, 0 for no limit");
  auto* summarizeOption =
      app.add_option("--summarize", summarizePath, "Summarize an existing log and exit");
  app.add_option("--log-level", logLevel, "trace, debug, info, warn or error");
  serversOption->excludes(summarizeOption);
  CLI11_PARSE(app, argc, argv);

  try {
    initLogging(logLevel);
    if (!summarizePath.empty()) {
      std::ifstream in(summarizePath);
      if (!in) throw Error("cannot open " + summarizePath);
      printSummary(readProbeLog(in));
      return 0;
    }
    if (serversFile.empty()) {
      std::cerr << "npmonitor: --servers is required\n";
      return 1;
    }
    auto servers = loadServerList(serversFile);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (!out.empty()) {
      bool fresh = !fs::exists(out) || fs::file_size(out) == 0;
      file.open(out, std::ios::app);
      if (!file) throw Error("cannot open " + out);
      if (fresh) file << kProbeCsvHeader << "\n" << std::flush;
      sink = &file;
    } else {
      std::cout << kProbeCsvHeader << "\n";
    }

    MonitorOptions options;
    options.interval = std::chrono::milliseconds(static_cast<long long>(interval * 1000));
    options.rounds = rounds;
    HttpTransport transport;
    std::jthread loop([&](std::stop_token stop) {
      monitorLoop(transport, servers, options, *sink, stop);
      ::kill(::getpid(), SIGTERM);
    });
    int signal = 0;
    sigwait(&signals, &signal);
    loop.request_stop();
    loop.join();
    return 0;
  } catch (const std::exception& err) {
    std::cerr << "npmonitor: " << err.what() << "\n";
    return 2;
  }
}
