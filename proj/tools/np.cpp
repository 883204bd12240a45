// Command-line client; see nanomesh/cli.h for the commands.

#include <iostream>

#include "nanomesh/cli.h"
#include "nanomesh/config.h"

int main(int argc, char** argv) {
  nanomesh::initLogging("warn");
  nanomesh::HttpTransport transport;
  return nanomesh::cli::run(argc, argv, transport, std::cout, std::cerr);
}
