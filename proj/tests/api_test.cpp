#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "nanomesh/api.h"
#include "nanomesh/corpus.h"
#include "nanomesh/errors.h"
#include "nanomesh/gzip.h"
#include "nanomesh/http_server.h"
#include "nanomesh/remote.h"
#include "nanomesh/transport.h"
#include "nanomesh/wire.h"
#include "node_fixture.h"

using namespace nanomesh;
using nanomesh::testing::TestNode;

namespace {

const std::string kUrl = "http://np.local:9001/";

HttpRequest request(std::string method, std::string path, std::string body = {},
                    std::map<std::string, std::string> headers = {}) {
  return HttpRequest{std::move(method), std::move(path), std::move(headers), std::move(body)};
}

std::string codeOf(const Nanopub& np) { return TrustyUri::parse(np.uri()).code.str(); }

std::vector<Quad> sorted(std::vector<Quad> quads) {
  std::sort(quads.begin(), quads.end());
  return quads;
}

}  // namespace

TEST(Negotiation, MediaTypes) {
  EXPECT_EQ(negotiate("")->format, Format::kLineQuads);
  EXPECT_EQ(negotiate("application/n-quads")->mediaType, "application/n-quads");
  EXPECT_EQ(negotiate("text/plain")->mediaType, "text/plain");
  EXPECT_EQ(negotiate("application/trig")->format, Format::kGroupedGraphs);
  EXPECT_EQ(negotiate("*/*")->format, Format::kLineQuads);
  EXPECT_EQ(negotiate("application/trig;q=0.5, application/n-quads")->format,
            Format::kLineQuads);
  EXPECT_EQ(negotiate("application/n-quads;q=0.2, application/trig;q=0.9")->format,
            Format::kGroupedGraphs);
  EXPECT_FALSE(negotiate("application/trix"));
  EXPECT_FALSE(negotiate("application/trig;q=0"));
}

TEST(Api, InfoCountsPublishedNanopubs) {
  TestNode node(kUrl);
  auto fresh = node.api.handle(request("GET", "/"));
  EXPECT_EQ(fresh.status, 200);
  EXPECT_NE(fresh.body.find("nanopub-count: 0\n"), std::string::npos);
  for (const auto& np : genCorpus(3, 1)) {
    EXPECT_EQ(node.api.handle(request("POST", "/np", canonicalBytes(np))).status, 201);
  }
  ServerInfo info = parseInfo(node.api.handle(request("GET", "/")).body);
  EXPECT_EQ(info.nanopubCount, 3u);
  EXPECT_EQ(info.publicUrl, kUrl);
  EXPECT_EQ(info.protocolVersion, "nanomesh/1");
  EXPECT_TRUE(info.acceptsPosts);
  EXPECT_EQ(info.journalId, node.store->info().journalId);
}

TEST(Api, GetNanopub) {
  TestNode node(kUrl);
  auto np = genCorpus(1, 2)[0];
  node.store->put(np);
  auto plain = node.api.handle(request("GET", "/np/" + codeOf(np)));
  EXPECT_EQ(plain.status, 200);
  EXPECT_EQ(plain.contentType, "application/n-quads; charset=utf-8");
  EXPECT_TRUE(verify(parseNanopubBytes(plain.body)));

  auto alias = node.api.handle(request("GET", "/" + codeOf(np)));
  EXPECT_EQ(alias.body, plain.body);

  auto trig = node.api.handle(
      request("GET", "/np/" + codeOf(np), {}, {{"accept", "application/trig"}}));
  EXPECT_EQ(trig.status, 200);
  EXPECT_EQ(trig.contentType, "application/trig; charset=utf-8");
  EXPECT_EQ(sorted(parseQuads(trig.body, Format::kGroupedGraphs)),
            sorted(parseQuads(plain.body, Format::kLineQuads)));

  EXPECT_EQ(node.api.handle(request("GET", "/np/" + codeOf(np), {},
                                    {{"accept", "application/trix"}}))
                .status,
            406);
  EXPECT_EQ(node.api.handle(request("GET", "/np/" + codeOf(genCorpus(1, 3)[0]))).status, 404);
  EXPECT_EQ(node.api.handle(request("GET", "/np/RAshort")).status, 400);
  EXPECT_EQ(node.api.handle(request("GET", "/np/" + codeOf(np) + "/x")).status, 404);
}

TEST(Api, JournalPages) {
  TestNode node(kUrl, 3);
  auto nps = genCorpus(5, 4);
  node.store->putBatch(std::span(nps).first(2));
  auto page = node.api.handle(request("GET", "/journal/1"));
  EXPECT_EQ(page.status, 200);
  EXPECT_EQ(std::count(page.body.begin(), page.body.end(), '\n'), 2);
  EXPECT_EQ(page.body.substr(0, kUrl.size()), kUrl);
  EXPECT_EQ(node.api.handle(request("GET", "/journal/0")).status, 404);
  EXPECT_EQ(node.api.handle(request("GET", "/journal/2")).status, 404);
  EXPECT_EQ(node.api.handle(request("GET", "/journal/x")).status, 400);

  node.store->putBatch(nps);
  auto codes = parsePageListing(node.api.handle(request("GET", "/journal/1")).body);
  ASSERT_EQ(codes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(codes[i].str(), codeOf(nps[i]));
}

TEST(Api, PageLinesEndInValidCodes) {
  std::mt19937_64 rng(5);
  auto pool = genCorpus(40, 5);
  for (int round = 0; round < 3; ++round) {
    TestNode node(kUrl, 1 + rng() % 10);
    for (int i = 0; i < 30; ++i) node.store->put(pool[rng() % pool.size()]);
    for (std::uint64_t p = 1; p <= node.store->lastPage(); ++p) {
      auto body = node.api.handle(request("GET", "/journal/" + std::to_string(p))).body;
      std::istringstream in(body);
      std::string line;
      while (std::getline(in, line)) {
        EXPECT_TRUE(hasArtifactCode(line)) << line;
        EXPECT_TRUE(ArtifactCode::tryParse(line.substr(line.size() - 45)));
      }
    }
  }
}

TEST(Api, Packages) {
  TestNode node(kUrl, 4);
  auto nps = genCorpus(6, 6);
  node.store->putBatch(nps);
  auto package = node.api.handle(request("GET", "/package/1"));
  EXPECT_EQ(package.status, 200);
  EXPECT_EQ(package.contentEncoding, "gzip");
  auto items = splitPackage(gzipDecompress(package.body));
  ASSERT_EQ(items.size(), 4u);
  for (const auto& item : items) {
    EXPECT_TRUE(verifyAs(parseNanopubBytes(item.bytes), ArtifactCode::parse(item.code)));
  }
  EXPECT_EQ(node.api.handle(request("GET", "/package/2")).status, 404);
  EXPECT_EQ(node.api.handle(request("GET", "/package/9")).status, 404);
}

TEST(Api, PostNanopub) {
  TestNode node(kUrl);
  auto np = genCorpus(1, 7)[0];
  auto first = node.api.handle(request("POST", "/np", canonicalBytes(np)));
  EXPECT_EQ(first.status, 201);
  EXPECT_EQ(first.body, np.uri() + "\n");
  EXPECT_EQ(node.api.handle(request("GET", "/np/" + codeOf(np))).status, 200);
  EXPECT_EQ(node.api.handle(request("POST", "/np", canonicalBytes(np))).status, 200);

  // grouped graphs body
  auto other = genCorpus(1, 8)[0];
  EXPECT_EQ(node.api.handle(request("POST", "/np",
                                    serializeQuads(other.quads(), Format::kGroupedGraphs),
                                    {{"content-type", "application/trig"}}))
                .status,
            201);

  std::mt19937_64 rng(1);
  auto tampered = genCorpus(1, 9)[0];
  Nanopub bad = assembleNanopub(nanomesh::testing::mutateOneLiteral(tampered, rng));
  EXPECT_EQ(node.api.handle(request("POST", "/np", canonicalBytes(bad))).status, 400);
  EXPECT_FALSE(node.store->contains(ArtifactCode::parse(codeOf(tampered))));

  EXPECT_EQ(node.api.handle(request("POST", "/np", "garbage")).status, 400);
  auto two = genCorpus(2, 10);
  EXPECT_EQ(node.api.handle(request("POST", "/np",
                                    canonicalBytes(two[0]) + canonicalBytes(two[1])))
                .status,
            400);
  std::string huge(kMaxPostBytes + 1, ' ');
  EXPECT_EQ(node.api.handle(request("POST", "/np", huge)).status, 413);
  EXPECT_EQ(node.store->info().nanopubCount, 2u);
}

TEST(Api, PostsDisabled) {
  TestNode node(kUrl, kDefaultPageSize, false);
  auto np = genCorpus(1, 11)[0];
  EXPECT_EQ(node.api.handle(request("POST", "/np", canonicalBytes(np))).status, 405);
  EXPECT_EQ(node.api.handle(request("POST", "/peers", "http://other:1/")).status, 405);
  EXPECT_NE(node.api.handle(request("GET", "/")).body.find("accepts-posts: false"),
            std::string::npos);
}

TEST(Api, Peers) {
  TestNode node(kUrl);
  EXPECT_EQ(node.api.handle(request("GET", "/peers")).body, "");
  EXPECT_EQ(node.api.handle(request("POST", "/peers", "http://other:1")).status, 202);
  EXPECT_EQ(node.api.handle(request("GET", "/peers")).body, "http://other:1/\n");
  EXPECT_EQ(node.api.handle(request("POST", "/peers", "http://OTHER:1/\n")).status, 200);
  EXPECT_EQ(node.api.handle(request("POST", "/peers", kUrl)).status, 200);
  EXPECT_EQ(node.api.handle(request("POST", "/peers", "not a url")).status, 400);
  EXPECT_EQ(node.peers.size(), 1u);
}

TEST(Api, OwnUrlNeverListedUnderAdversarialPosts) {
  TestNode node(kUrl);
  std::vector<std::string> variants = {
      kUrl, "http://NP.local:9001", "http://np.local:9001", " http://np.local:9001/ ",
      "HTTP://np.local:9001/", "http://np.local:9002/", "http://np.local:9001/x"};
  for (const auto& v : variants) node.api.handle(request("POST", "/peers", v));
  for (const auto& url : node.peers.list()) EXPECT_NE(url, kUrl);
  EXPECT_EQ(node.peers.size(), 2u);
}

TEST(Api, MethodsAndUnknownPaths) {
  TestNode node(kUrl);
  EXPECT_EQ(node.api.handle(request("DELETE", "/")).status, 405);
  EXPECT_EQ(node.api.handle(request("GET", "/np")).status, 405);
  EXPECT_EQ(node.api.handle(request("POST", "/journal/1")).status, 405);
  EXPECT_EQ(node.api.handle(request("GET", "/nothing")).status, 404);
}

TEST(Api, ReplayingWritesIsIdempotent) {
  TestNode a(kUrl);
  auto nps = genCorpus(5, 12);
  std::vector<HttpRequest> writes;
  for (const auto& np : nps) writes.push_back(request("POST", "/np", canonicalBytes(np)));
  writes.push_back(request("POST", "/peers", "http://p:1/"));
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& w : writes) a.api.handle(w);
  }
  EXPECT_EQ(a.store->info().nanopubCount, 5u);
  EXPECT_EQ(a.peers.size(), 1u);
}

TEST(LocalTransport, RoutesAndRefuses) {
  TestNode node(kUrl);
  LocalTransport transport;
  transport.attach(kUrl, &node.api);
  EXPECT_EQ(remote::fetchInfo(transport, kUrl).publicUrl, kUrl);
  EXPECT_THROW(remote::fetchInfo(transport, "http://elsewhere:1/"), FetchError);
  EXPECT_EQ(transport.calls(), 2);
}

TEST(HttpServer, EndToEnd) {
  TestNode node("http://127.0.0.1:0/");
  HttpServer server(node.api, 4);
  int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.run(); });
  server.waitUntilReady();
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/";

  HttpTransport transport;
  auto nps = genCorpus(3, 13);
  for (const auto& np : nps) EXPECT_EQ(remote::postNanopub(transport, url, np), 201);
  EXPECT_EQ(remote::fetchInfo(transport, url).nanopubCount, 3u);
  auto code = TrustyUri::parse(nps[1].uri()).code;
  EXPECT_EQ(remote::fetchVerified(transport, url, code).uri(), nps[1].uri());
  EXPECT_FALSE(remote::fetchNanopub(transport, url, TrustyUri::parse(genCorpus(1, 14)[0].uri()).code));
  EXPECT_EQ(remote::fetchPage(transport, url, 1).size(), 3u);
  EXPECT_EQ(transport.get(url + "np/" + code.str(), "application/trix").status, 406);
  EXPECT_EQ(remote::postPeer(transport, url, "http://peer:5"), 202);
  EXPECT_EQ(remote::fetchPeers(transport, url), (std::vector<std::string>{"http://peer:5/"}));

  server.stop();
  thread.join();
  EXPECT_THROW(remote::fetchInfo(transport, url), FetchError);
}

TEST(HttpServer, PackagesTravelGzipped) {
  TestNode node("http://127.0.0.1:0/", 10);
  node.store->putBatch(genCorpus(10, 15));
  HttpServer server(node.api, 2);
  int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.run(); });
  server.waitUntilReady();
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/";
  HttpTransport transport;
  auto raw = transport.get(url + "package/1");
  EXPECT_EQ(raw.contentEncoding, "gzip");
  EXPECT_EQ(raw.body, node.store->getPackage(1));
  EXPECT_EQ(remote::fetchPackage(transport, url, 1).size(), 10u);
  server.stop();
  thread.join();
}
