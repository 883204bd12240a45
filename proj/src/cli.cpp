#include "nanomesh/cli.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <set>

#include "nanomesh/batch.h"
#include "nanomesh/config.h"
#include "nanomesh/errors.h"
#include "nanomesh/rdf_io.h"
#include "nanomesh/remote.h"
#include "nanomesh/store.h"
#include "nanomesh/wire.h"

namespace nanomesh::cli {

namespace fs = std::filesystem;

namespace {

std::string plural(std::size_t n, const std::string& word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

// Reads a document and splits it into nanopubs. Reports and returns an exit
// code on failure.
std::optional<std::vector<Nanopub>> readNanopubs(Context& ctx, const fs::path& path,
                                                 int& exitCode) {
  std::string text;
  try {
    text = readFile(path);
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    exitCode = kUsage;
    return std::nullopt;
  }
  try {
    return splitDocument(parseQuads(text, formatForPath(path)));
  } catch (const Error& err) {
    ctx.err << "Error: " << path.string() << ": " << err.what() << "\n";
    exitCode = kValidation;
    return std::nullopt;
  }
}

void writeNanopubs(const std::vector<Nanopub>& nps, const fs::path& path) {
  std::vector<Quad> quads;
  for (const auto& np : nps) quads.insert(quads.end(), np.quads().begin(), np.quads().end());
  writeFile(path, serializeQuads(quads, formatForPath(path)));
}

std::optional<ArtifactCode> codeArgument(Context& ctx, const std::string& uriOrCode) {
  auto code = extractCode(uriOrCode);
  if (!code) ctx.err << "Error: no artifact code in '" << uriOrCode << "'\n";
  return code;
}

bool needServers(Context& ctx) {
  if (!ctx.servers.empty()) return true;
  ctx.err << "Error: no servers configured (use --server or a servers file)\n";
  return false;
}

// Tries the servers in order. Not-found and unreachable servers are
// skipped; content that fails verification is fatal.
Nanopub fetchAnywhere(Context& ctx, const ArtifactCode& code) {
  for (const auto& server : ctx.servers) {
    try {
      if (auto np = remote::fetchNanopub(ctx.transport, server, code)) {
        bool ok = false;
        try {
          ok = verifyAs(*np, code);
        } catch (const Error&) {
        }
        if (!ok) {
          throw VerificationError(remote::nanopubUrl(server, code),
                                  "content does not verify");
        }
        return std::move(*np);
      }
    } catch (const VerificationError&) {
      throw;
    } catch (const FetchError& err) {
      ctx.err << "Warning: " << err.what() << "\n";
    }
  }
  throw FetchError(code.str(), "not found on any server");
}

}  // namespace

int cmdMktrusty(Context& ctx, const fs::path& input, bool verbose) {
  int exitCode = kOk;
  auto nps = readNanopubs(ctx, input, exitCode);
  if (!nps) return exitCode;
  if (nps->empty()) {
    ctx.err << "Error: no nanopublications found in " << input.string() << "\n";
    return kValidation;
  }
  for (const auto& np : *nps) {
    if (hasArtifactCode(np.uri())) {
      ctx.err << "Error: already trusty: " << np.uri() << "\n";
      return kValidation;
    }
  }
  std::vector<Nanopub> trusty;
  try {
    trusty = batch::makeTrustyAll(*nps);
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kValidation;
  }
  fs::path output = input.parent_path() / ("trusty." + input.filename().string());
  try {
    writeNanopubs(trusty, output);
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kUsage;
  }
  if (verbose) {
    for (const auto& np : trusty) ctx.out << "Nanopub URI: " << np.uri() << "\n";
  }
  return kOk;
}

int cmdPublish(Context& ctx, const fs::path& input) {
  int exitCode = kOk;
  auto nps = readNanopubs(ctx, input, exitCode);
  if (!nps) return exitCode;
  if (nps->empty()) {
    ctx.err << "Error: no nanopublications found in " << input.string() << "\n";
    return kValidation;
  }
  // Everything is checked locally before the first request goes out.
  auto ok = batch::verifyAll(*nps);
  for (std::size_t i = 0; i < nps->size(); ++i) {
    if (!ok[i]) {
      ctx.err << "Error: not a valid trusty nanopublication: " << (*nps)[i].uri() << "\n";
      return kValidation;
    }
  }
  if (!needServers(ctx)) return kUsage;
  for (const auto& server : ctx.servers) {
    bool accepted = true;
    for (const auto& np : *nps) {
      int status = 0;
      try {
        status = remote::postNanopub(ctx.transport, server, np);
      } catch (const FetchError& err) {
        ctx.err << "Warning: " << err.what() << "\n";
        accepted = false;
        break;
      }
      if (status != 200 && status != 201) {
        ctx.err << "Warning: " << server << " answered HTTP " << status << "\n";
        accepted = false;
        break;
      }
    }
    if (accepted) {
      ctx.out << plural(nps->size(), "nanopub") << " published at " << server << "\n";
      return kOk;
    }
  }
  ctx.err << "Error: no server accepted the nanopublications\n";
  return kNetwork;
}

int cmdStatus(Context& ctx, const std::string& uriOrCode, bool all) {
  auto code = codeArgument(ctx, uriOrCode);
  if (!code) return kValidation;
  if (!needServers(ctx)) return kUsage;
  std::vector<std::string> servers = ctx.servers;
  std::set<std::string> seen(servers.begin(), servers.end());
  if (all) {
    for (const auto& server : ctx.servers) {
      try {
        for (const auto& peer : remote::fetchPeers(ctx.transport, server)) {
          if (seen.insert(peer).second) servers.push_back(peer);
        }
      } catch (const FetchError&) {
        // reported below when the server itself is queried
      }
    }
  }
  std::size_t found = 0;
  for (const auto& server : servers) {
    try {
      auto response = ctx.transport.get(remote::nanopubUrl(server, *code));
      if (response.status == 200) {
        ++found;
        ctx.out << "URL: " << server << code->str() << "\n";
      }
    } catch (const FetchError&) {
      ctx.err << "Unreachable: " << server << "\n";
    }
  }
  ctx.out << "Found on " << plural(found, "nanopub server") << ".\n";
  return kOk;
}

int cmdMkindex(Context& ctx, const std::vector<fs::path>& inputs,
               const std::optional<std::string>& title, const fs::path& output,
               const IndexOptions& options) {
  std::vector<Nanopub> nps;
  for (const auto& input : inputs) {
    int exitCode = kOk;
    auto some = readNanopubs(ctx, input, exitCode);
    if (!some) return exitCode;
    nps.insert(nps.end(), some->begin(), some->end());
  }
  if (nps.empty()) {
    ctx.err << "Error: no nanopublications to index\n";
    return kValidation;
  }
  std::vector<IndexNode> chain;
  try {
    chain = buildIndexFromNanopubs(nps, title, options);
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kValidation;
  }
  std::vector<Nanopub> nodes;
  for (const auto& node : chain) nodes.push_back(node.nanopub);
  try {
    writeNanopubs(nodes, output);
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kUsage;
  }
  ctx.out << "Index URI: " << chain.back().nanopub.uri() << "\n";
  return kOk;
}

int cmdGet(Context& ctx, const std::string& uriOrCode, bool content,
           const std::optional<fs::path>& output) {
  auto code = codeArgument(ctx, uriOrCode);
  if (!code) return kValidation;
  if (!needServers(ctx)) return kUsage;
  std::vector<Nanopub> result;
  try {
    Nanopub np = fetchAnywhere(ctx, *code);
    if (!content) {
      result.push_back(std::move(np));
    } else {
      if (!isIndex(np)) {
        ctx.err << "Error: " << np.uri() << " is not an index\n";
        return kValidation;
      }
      FetchFn fetch = [&](const TrustyUri& uri) {
        return fetchAnywhere(ctx, uri.code);
      };
      ResolvedSet members = resolveIndex(TrustyUri::parse(np.uri()), fetch);
      for (const auto& member : members.members) result.push_back(fetchAnywhere(ctx, member.code));
    }
  } catch (const VerificationError& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kValidation;
  } catch (const FetchError& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kNetwork;
  } catch (const Error& err) {
    ctx.err << "Error: " << err.what() << "\n";
    return kValidation;
  }
  if (output) {
    try {
      writeNanopubs(result, *output);
    } catch (const Error& err) {
      ctx.err << "Error: " << err.what() << "\n";
      return kUsage;
    }
  } else {
    for (const auto& np : result) ctx.out << canonicalBytes(np);
  }
  return kOk;
}

int run(int argc, const char* const* argv, Transport& transport, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Create, publish and retrieve nanopublications", "np"};
  app.require_subcommand(1);
  std::vector<std::string> serverFlags;
  std::string serversFile;
  app.add_option("--server", serverFlags, "Server URL (repeatable; overrides the servers file)");
  app.add_option("--servers-file", serversFile, "File with one server URL per line");

  bool verbose = false;
  fs::path mktrustyInput;
  auto* mktrusty = app.add_subcommand("mktrusty", "Give nanopublications trusty URIs");
  mktrusty->add_flag("-v,--verbose", verbose, "Print the new URIs");
  mktrusty->add_option("file", mktrustyInput, "Input file")->required();

  fs::path publishInput;
  auto* publish = app.add_subcommand("publish", "Publish trusty nanopublications");
  publish->add_option("file", publishInput, "Input file")->required();

  bool statusAll = false;
  std::string statusTarget;
  auto* status = app.add_subcommand("status", "Show which servers host a nanopublication");
  status->add_flag("-a,--all", statusAll, "Also ask the servers' peers");
  status->add_option("uri", statusTarget, "Trusty URI or artifact code")->required();

  std::string title;
  std::string indexOutput;
  std::string indexBase;
  std::vector<fs::path> indexInputs;
  auto* mkindex = app.add_subcommand("mkindex", "Make an index of nanopublications");
  auto* titleOption = mkindex->add_option("-t,--title", title, "Index title");
  mkindex->add_option("-o,--output", indexOutput, "Output file");
  mkindex->add_option("--base", indexBase, "URI prefix for the index (default: first server)");
  mkindex->add_option("files", indexInputs, "Input files")->required();

  bool getContent = false;
  std::string getTarget;
  std::string getOutput;
  auto* get = app.add_subcommand("get", "Download a nanopublication or an index's content");
  get->add_flag("-c,--content", getContent, "Download the members of the index");
  get->add_option("-o,--output", getOutput, "Output file (default: standard output)");
  get->add_option("uri", getTarget, "Trusty URI or artifact code")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::vector<std::string> servers;
  try {
    if (!serverFlags.empty()) {
      for (const auto& s : serverFlags) {
        auto url = normalizeServerUrl(s);
        if (!url) {
          err << "Error: not a server URL: " << s << "\n";
          return kUsage;
        }
        servers.push_back(*url);
      }
    } else {
      fs::path file = serversFile;
      if (file.empty()) {
        if (auto env = processEnv("NANOMESH_SERVERS_FILE")) {
          file = *env;
        } else if (auto home = processEnv("HOME")) {
          file = fs::path(*home) / ".config/nanomesh/servers";
        }
      }
      if (!file.empty() && (!serversFile.empty() || fs::exists(file))) {
        servers = loadServerList(file);
      }
    }
  } catch (const ConfigError& e) {
    err << "Error: " << e.what() << "\n";
    return kUsage;
  }

  Context ctx{transport, servers, out, err};
  if (*mktrusty) return cmdMktrusty(ctx, mktrustyInput, verbose);
  if (*publish) return cmdPublish(ctx, publishInput);
  if (*status) return cmdStatus(ctx, statusTarget, statusAll);
  if (*mkindex) {
    IndexOptions options;
    if (!indexBase.empty()) {
      options.baseUri = indexBase;
    } else if (!servers.empty()) {
      options.baseUri = servers.front();
    }
    fs::path output = indexOutput.empty()
                          ? indexInputs.front().parent_path() /
                                ("index." + indexInputs.front().filename().string())
                          : fs::path(indexOutput);
    std::optional<std::string> t;
    if (*titleOption) t = title;
    return cmdMkindex(ctx, indexInputs, t, output, options);
  }
  if (*get) {
    std::optional<fs::path> output;
    if (!getOutput.empty()) output = getOutput;
    return cmdGet(ctx, getTarget, getContent, output);
  }
  return kUsage;
}

}  // namespace nanomesh::cli
