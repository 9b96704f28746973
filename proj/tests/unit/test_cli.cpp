#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mixcenter/cli.hpp"
#include "mixcenter/io.hpp"

using namespace mixcenter;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mixcenter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mixcenter_cli_unit";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("every command stamps schema version and name") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"interval", "--n", "3"}, {"bounds", "--n", "4"}, {"dual", "--n", "3", "--c", "0.1"}}) {
    const Run r = run(args);
    REQUIRE(r.code == 0);
    const json d = r.doc();
    CHECK(d["schema_version"] == cli::kSchemaVersion);
    CHECK(d["command"] == args[0]);
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"interval", "--bogus"}).code == 2);
  CHECK(run({"sample", "--engine", "fast"}).code == 2);
  CHECK(run({"bounds", "--dist", "{not json"}).code == 2);
  CHECK(run({"feasible", "--marginals", scratch("absent.json").string(), "--center", "0"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("Subcommands") != std::string::npos);
}

TEST_CASE("domain errors exit with 1") {
  CHECK(run({"sample", "--c", "0.9", "--count", "5", "--out", scratch("x.csv").string()}).code == 1);
  CHECK(run({"sample", "--c", "0.1", "--engine", "ra", "--count", "5", "--out", scratch("x.csv").string()}).code == 1);
  const fs::path cauchy = write("cauchy.json", R"([{"kind": "cauchy"}, {"kind": "cauchy"}])");
  const Run r = run({"centers", "--marginals", cauchy.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("finite") != std::string::npos);
}

TEST_CASE("feasible and centers on the two-point family") {
  const fs::path fam = write("family.json", R"({"marginals": [{"kind": "finite", "atoms": [[0, 0.3333333333333333], [1, 0.6666666666666667]], "repeat": 3}]})");
  const Run f = run({"feasible", "--marginals", fam.string(), "--center", "2", "--exact", "--out", scratch("f.json").string()});
  REQUIRE(f.code == 0);
  CHECK(f.doc()["verdict"] == "feasible");
  CHECK(io::read_json_file(scratch("f.json")) == f.doc());
  CHECK(run({"feasible", "--marginals", fam.string(), "--center", "1"}).doc()["verdict"] == "infeasible");
  CHECK(run({"centers", "--marginals", fam.string()}).doc()["centers"] == json::array({2.0}));
}

TEST_CASE("sample then verify uses the sidecar config") {
  const fs::path csv = scratch("rows.csv");
  const Run s = run({"sample", "--n", "3", "--c", "0.12", "--count", "3000", "--seed", "5", "--out", csv.string(),
                     "--threads", "2"});
  REQUIRE(s.code == 0);
  const json meta = io::read_json_file(io::sidecar_path(csv));
  CHECK(meta["c"] == 0.12);
  CHECK(meta["seed"] == 5);
  CHECK(meta["engine"] == "construction");
  CHECK(meta.contains("mass_deficit"));
  const Run v = run({"verify", csv.string()});
  CHECK(v.code == 0);
  CHECK(v.doc()["all_passed"] == true);

  // Same seed, different thread count: identical file.
  const fs::path again = scratch("rows2.csv");
  run({"sample", "--n", "3", "--c", "0.12", "--count", "3000", "--seed", "5", "--out", again.string(), "--threads", "1"});
  std::ifstream a(csv), b(again);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("verify on a coupling file") {
  const fs::path dir = scratch("ex01");
  REQUIRE(run({"ex01", "--K", "8", "--out-dir", dir.string()}).code == 0);
  const fs::path mu = write("ex01_third.json", R"({"marginals": [{"kind": "ex01_gamma", "K": 8}]})");
  // Only finite marginals are accepted for coupling certification.
  CHECK(run({"verify", "--coupling", (dir / "ex01_x.json").string(), "--marginals", mu.string(), "--center", "0"}).code == 1);

  const fs::path fam = write("fam2.json", R"([{"kind": "finite", "atoms": [[0, 0.5], [1, 0.5]]}, {"kind": "finite", "atoms": [[0, 0.5], [1, 0.5]]}])");
  const fs::path cp = write("cp.json", R"({"n": 2, "support": [[0, 1], [1, 0]], "weights": [0.5, 0.5]})");
  const Run ok = run({"verify", "--coupling", cp.string(), "--marginals", fam.string(), "--center", "1", "--format", "csv"});
  CHECK(ok.code == 0);
  CHECK(ok.out.rfind("name,passed", 0) == 0);
  CHECK(run({"verify", "--coupling", cp.string(), "--marginals", fam.string(), "--center", "0"}).code == 1);
}

TEST_CASE("repro matches the stored expectations") {
  const Run r = run({"repro"});
  CHECK(r.code == 0);
  const json d = r.doc();
  CHECK(d["all_match"] == true);
  CHECK(d["unexpected_measurements"].empty());

  const fs::path bad = write("expect.json", R"({"entries": [{"id": "cauchy_interval_n2_hi", "expected": 1.0, "compare": "abs", "tol": 0}]})");
  const Run diff = run({"repro", "--expectations", bad.string()});
  CHECK(diff.code == 1);
  CHECK(diff.doc()["entries"][0]["status"] == "differs");
}
