#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace {

const std::string kConfigDir = std::string(QCLAB_SOURCE_DIR) + "/configs/";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qclab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
TEST_CASE("list in all formats") {
  const Run j = run({"list", "--format", "json"});
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  REQUIRE(doc.is_array());
  CHECK(doc[0]["name"] == "heisenberg-1");
  CHECK(doc[0]["dimension"] == 7);
  const Run c = run({"list", "--format", "csv", "--config-dir", kConfigDir});
  CHECK(c.code == 0);
  CHECK(c.out.rfind("name,n,dimension,source,description\n", 0) == 0);
  CHECK(c.out.find("spherical-1") != std::string::npos);
}

TEST_CASE("usage and input errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"validate"}).code == 2);
  CHECK(run({"validate", "--chart", "nope"}).code == 2);
  CHECK(run({"validate", "--chart", "heisenberg-1", "--config", kConfigDir + "heisenberg-1.qc"}).code == 2);
  CHECK(run({"validate", "--chart", "heisenberg-1", "--at", "1,2"}).code == 2);
  CHECK(run({"validate", "--config", "/nonexistent.qc"}).code == 2);
  CHECK(run({"invariants", "--chart", "heisenberg-1", "--fd-order", "3"}).code == 2);
  CHECK(run({"validate", "--chart", "heisenberg-1", "--format", "xml"}).code == 2);
}

TEST_CASE("validate reports failing points with exit 1") {
  const Run bad = run({"validate", "--config", kConfigDir + "bad-bi1.qc", "--format", "csv"});
  CHECK(bad.code == 1);
  CHECK(bad.out.find(",fail,") != std::string::npos);
  CHECK(run({"invariants", "--config", kConfigDir + "bad-bi1.qc"}).code == 1);
  const Run good = run({"validate", "--config", kConfigDir + "heisenberg-1.qc"});
  CHECK(good.code == 0);
}

TEST_CASE("invariants JSON carries the schema and settings") {
  const Run r = run({"invariants", "--chart", "heisenberg-1-exp", "--points", "2", "--format", "json",
                     "--tol-ricci", "0.001"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["command"] == "invariants");
  CHECK(doc["settings"]["tolerances"]["ricci"] == 0.001);
  CHECK(doc["rows"].size() == 2);
  CHECK(doc["rows"][0]["status"] == "pass");
  CHECK(doc["rows"][0]["T0_norm"].get<double>() > 1e-3);
}

TEST_CASE("normality output is identical across thread counts") {
  const std::vector<std::string> base = {"normality", "--chart", "heisenberg-1-exp", "--points", "3",
                                         "--fiber", "2", "--format", "json"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1"});
  auto two = base;
  two.insert(two.end(), {"--threads", "3"});
  const Run a = run(one);
  const Run b = run(two);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["summary"]["verdict"] == "not_normal");
  CHECK(doc["rows"].size() == 6);
}

TEST_CASE("explicit points and CSV columns") {
  const Run r = run({"normality", "--chart", "heisenberg-1", "--at", "0.1,0.2,0.3,0.4,0,0,0", "--fiber", "1",
                     "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("index,point,fiber,x1,x2,x3,x4,t1,t2,t3,fiber_x1,fiber_x2,fiber_x3,status,normality_residual,", 0) ==
        0);
  CHECK(r.out.find(",normal,7,2,") != std::string::npos);
}

TEST_CASE("identities suite passes on the spherical config") {
  const Run r = run({"identities", "--config", kConfigDir + "spherical-1.qc", "--points", "1", "--fiber", "2",
                     "--oracle", "--format", "json"});
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["summary"]["ok"] == true);
  bool mte_ran = false;
  for (const auto& row : doc["rows"])
    if (row["check"] == "mte") mte_ran = row["status"] == "pass";
  CHECK(mte_ran);
}

TEST_CASE("identities reports errors for an invalid chart") {
  const Run r = run({"identities", "--config", kConfigDir + "bad-bi1.qc", "--fiber", "1", "--format", "json"});
  CHECK(r.code == 1);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["summary"]["ok"] == false);
  CHECK(doc["summary"]["errors"][0].get<std::string>().rfind("point 0: BiquardConditionFail", 0) == 0);
  for (const auto& row : doc["rows"]) {
    if (row["check"] == "bi1") CHECK(row["status"] == "fail");
    if (row["check"] == "alpha") CHECK(row["status"] == "skipped");
  }
}

TEST_CASE("sweep grid") {
  const Run r = run({"sweep", "--chart", "heisenberg-1-mixed", "--grid", "2", "--axes", "1,5", "--fiber", "1",
                     "--format", "csv"});
  CHECK(r.code == 0);
  int lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  CHECK(lines == 5);
  CHECK(run({"sweep", "--chart", "heisenberg-1", "--grid", "2", "--axes", "1,1"}).code == 2);
}
}
