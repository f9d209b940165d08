#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "spec_io.hpp"

using namespace liouville;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(LIOUVILLE_DATA_DIR) + "/" + name; }

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "liouville_cli_tests";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Cli, PeriodsTableAndJsonAgree) {
  CliResult t = run({"periods", "--spec", data("triaxial_321.json")});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  CliResult j = run({"periods", "--spec", data("triaxial_321.json"), "--json"});
  ASSERT_EQ(j.code, kExitOk) << j.err;
  auto doc = nlohmann::json::parse(j.out);
  LiouvilleManifold M = make_manifold(load_spec(data("triaxial_321.json")));
  ASSERT_EQ(doc["periods"].size(), 2u);
  for (int i = 1; i <= 2; ++i) {
    const auto& r = doc["periods"][i - 1];
    EXPECT_EQ(r["alpha"].get<double>(), M.alpha(i));
    EXPECT_LT(std::abs(r["symmetry_residual"].get<double>()), 1e-12);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", M.alpha(i));
    EXPECT_NE(t.out.find(buf), std::string::npos);
  }
  EXPECT_EQ(RunHeader::parse(t.out), RunHeader::parse(j.out));
}

TEST(Cli, ExitCodes) {
  CliResult bad = run({"periods", "--spec", data("bad_order.json")});
  EXPECT_EQ(bad.code, kExitInput);
  EXPECT_NE(bad.err.find("input error"), std::string::npos);
  EXPECT_EQ(run({"periods", "--spec", data("triaxial_321.json"), "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"nosuchcommand"}).code, kExitUsage);
  EXPECT_EQ(run({"periods", "--spec", data("missing.json")}).code, kExitInput);
  EXPECT_EQ(run({"geodesic", "--spec", data("triaxial_321.json"), "--point", "0.1"}).code,
            kExitInput);
  EXPECT_EQ(run({"geodesic", "--spec", data("triaxial_321.json"), "--point", "0.1,x", "--eta",
                 "1,0"}).code,
            kExitInput);
  EXPECT_EQ(run({"periods", "--spec", data("triaxial_321.json"), "--workers", "0"}).code, kExitUsage);
}

TEST(Cli, VerifySuites) {
  CliResult id = run({"verify", "--spec", data("ellipsoid_4321.json"), "--suite", "identities", "--draws",
                "20"});
  EXPECT_EQ(id.code, kExitOk) << id.err;
  EXPECT_NE(id.out.find("PASS"), std::string::npos);
  // round_4321 violates the derivative sign condition: logged, not asserted
  CliResult iq = run({"verify", "--spec", data("round_4321.json"), "--suite", "inequalities", "--draws",
                "5"});
  EXPECT_EQ(iq.code, kExitOk);
  EXPECT_NE(iq.err.find("premise failed"), std::string::npos);
  CliResult n2 = run({"verify", "--spec", data("triaxial_321.json"), "--suite", "inequalities"});
  EXPECT_EQ(n2.code, kExitOk);
  EXPECT_NE(n2.err.find("skipped"), std::string::npos);
}

TEST(Cli, VerifyIsDeterministic) {
  std::vector<std::string> base{"verify", "--spec", data("ellipsoid_4321.json"), "--draws", "15",
                                "--seed", "7", "--json"};
  CliResult a = run(base), b = run(base);
  auto w4 = base;
  w4.insert(w4.end(), {"--workers", "4"});
  CliResult c = run(w4);
  EXPECT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  auto s8 = base;
  s8[6] = "8";
  EXPECT_NE(run(s8).out, a.out);
}

TEST(Cli, SummaryFileMatchesJson) {
  fs::path f = scratch("summary.json");
  CliResult r = run({"verify", "--spec", data("ellipsoid_4321.json"), "--suite", "identities", "--draws",
               "5", "--summary", f.string(), "--json"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_EQ(slurp(f), r.out);
}

TEST(Cli, GeodesicZeroLengthWritesOneRow) {
  fs::path f = scratch("g0.csv");
  CliResult r = run({"geodesic", "--spec", data("triaxial_321.json"), "--point", "0.5,0.4", "--eta",
               "0.3,0.8", "--T", "0", "--out", f.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::string text = slurp(f);
  std::istringstream is(text);
  std::string l;
  int rows = 0;
  bool header = false;
  while (std::getline(is, l)) {
    if (l.rfind("# run ", 0) == 0) continue;
    if (l.rfind("t,", 0) == 0) {
      header = true;
      continue;
    }
    ++rows;
    EXPECT_EQ(l.rfind("0,0.5,0.40000000000000002,", 0), 0u) << l;
  }
  EXPECT_TRUE(header);
  EXPECT_EQ(rows, 1);
  EXPECT_EQ(RunHeader::parse(text).command, "geodesic");
}

TEST(Cli, GeodesicEventsAndAngles) {
  fs::path f = scratch("g.csv"), e = scratch("g.events");
  CliResult r = run({"geodesic", "--spec", data("triaxial_321.json"), "--point", "0.5,0.4", "--angles",
               "0.7", "--T", "6", "--dt", "0.5", "--out", f.string(), "--events", e.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::string ev = slurp(e);
  EXPECT_NE(ev.find("event=turn"), std::string::npos);
  EXPECT_NE(ev.find("event=end"), std::string::npos);
  EXPECT_EQ(run({"geodesic", "--spec", data("triaxial_321.json"), "--point", "0.5,0.4", "--angles",
                 "0.7", "--eta", "1,0"}).code,
            kExitInput);
}

TEST(Cli, CutLocusJsonIsReproducible) {
  std::vector<std::string> args{"cut-locus", "--spec", data("triaxial_321.json"), "--point",
                                "0.6,0.5",   "--res",  "6x3"};
  CliResult a = run(args), b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(RunHeader::parse(a.out).command, "cut-locus");
}

TEST(RunHeader, LineRoundTrip) {
  RunHeader h;
  h.version = kVersion;
  h.command = "verify";
  h.spec_hash = "0123456789abcdef";
  h.seed = 42;
  h.tol.rtol = 3e-11;
  EXPECT_EQ(RunHeader::parse("x,y\n" + h.line("# ") + "1,2\n"), h);
  EXPECT_EQ(RunHeader::parse(h.line("comment ")), h);
  EXPECT_THROW(RunHeader::parse("nothing here\n"), InputError);
}

TEST(SpecIo, SidecarRoundTrip) {
  ManifoldSpec s = load_spec(data("ellipsoid_4321.json"));
  LiouvilleManifold M = make_manifold(s);
  fs::path dir = scratch("cache");
  fs::create_directories(dir);
  std::string file = sidecar_path(s, dir.string());
  write_period_sidecar(file, s, M.table());
  PeriodTable t;
  ASSERT_TRUE(read_period_sidecar(file, s, t));
  for (int i = 1; i <= 3; ++i) {
    EXPECT_EQ(t.alpha(i), M.alpha(i));
    for (int k = 0; k <= 20; ++k) {
      double x = M.alpha(i) * k / 20;
      EXPECT_EQ(t[i](x), M.f(i)(x));
    }
  }
  ManifoldSpec other = load_spec(data("round_4321.json"));
  EXPECT_FALSE(read_period_sidecar(file, other, t));
  EXPECT_FALSE(read_period_sidecar((dir / "absent.bin").string(), s, t));
  // cached and fresh runs print the same thing
  CliResult a = run({"periods", "--spec", data("ellipsoid_4321.json"), "--cache", dir.string()});
  CliResult b = run({"periods", "--spec", data("ellipsoid_4321.json")});
  EXPECT_EQ(a.out, b.out);
}

TEST(SpecIo, SpecDirEnvironment) {
  ::setenv("LIOUVILLE_SPEC_DIR", LIOUVILLE_DATA_DIR, 1);
  CliResult r = run({"periods", "--spec", "triaxial_321.json"});
  ::unsetenv("LIOUVILLE_SPEC_DIR");
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(run({"periods", "--spec", "triaxial_321.json"}).code, kExitInput);
}

TEST(SpecIo, HashIgnoresFormatting) {
  ManifoldSpec a = parse_spec_text(R"({"n":2,"a":[3,2,1],"A":{"kind":"sqrt"}})");
  ManifoldSpec b = parse_spec_text("{\n  \"A\": {\"kind\": \"sqrt\"},\n  \"a\": [3, 2, 1], \"n\": 2\n}");
  EXPECT_EQ(a.hash, b.hash);
  ManifoldSpec c = parse_spec_text(R"({"n":2,"a":[3,2,0.5],"A":{"kind":"sqrt"}})");
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
}
