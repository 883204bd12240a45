#pragma once

// The `np` command-line client:
//
//   np mktrusty [-v] FILE            writes trusty.FILE next to the input
//   np publish FILE                  posts each nanopub to the first server
//                                    that accepts them all
//   np status [-a] URI|CODE          which servers host it (-a: also their
//                                    peers, one hop)
//   np mkindex [-t TITLE] [-o OUT] FILE...
//   np get [-c] [-o OUT] URI|CODE    -c: the members of an index
//
// Servers come from --server flags, else from --servers-file, else from
// $NANOMESH_SERVERS_FILE, else from ~/.config/nanomesh/servers.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 network or not found.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nanomesh/index.h"
#include "nanomesh/transport.h"

namespace nanomesh::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNetwork = 3,
};

struct Context {
  Transport& transport;
  std::vector<std::string> servers;  // normalized, in preference order
  std::ostream& out;
  std::ostream& err;
};

int cmdMktrusty(Context& ctx, const std::filesystem::path& input, bool verbose);
int cmdPublish(Context& ctx, const std::filesystem::path& input);
int cmdStatus(Context& ctx, const std::string& uriOrCode, bool all);
int cmdMkindex(Context& ctx, const std::vector<std::filesystem::path>& inputs,
               const std::optional<std::string>& title, const std::filesystem::path& output,
               const IndexOptions& options);
// Writes to `output`, or to ctx.out as line quads when absent.
int cmdGet(Context& ctx, const std::string& uriOrCode, bool content,
           const std::optional<std::filesystem::path>& output);

// Parses arguments and dispatches. argv[0] is the program name.
int run(int argc, const char* const* argv, Transport& transport, std::ostream& out,
        std::ostream& err);

}  // namespace nanomesh::cli
