#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace qshare;
using cli::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(QSHARE_FIXTURES) + "/" + name; }

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qshare_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

const std::vector<std::string> kFast = {"--restarts", "8", "--format", "structured"};

std::vector<std::string> with(std::vector<std::string> args, const std::vector<std::string>& extra = kFast) {
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

using Cli = Scratch;

TEST_F(Cli, ComplexEncodingsAgree) {
  const std::string pairs = write("pairs.json", R"({"dims":[2],"entries":[[0.5,0],[0,-0.5],[0,0.5],[0.5,0]]})");
  const std::string flat = write("flat.json", R"({"dims":[2],"entries":[0.5,0,0,-0.5,0,0.5,0.5,0]})");
  const auto a = io::load_state(pairs), b = io::load_state(flat);
  EXPECT_EQ((a.state().matrix() - b.state().matrix()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.state()(0, 1), Complex(0, -0.5));
}

TEST_F(Cli, OddFlatListNamesOffset) {
  const std::string bad = write("odd.json", R"({"dims":[1,1],"entries":[1,0,0]})");
  const Outcome r = run(with({"analyze", bad}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("odd number of reals (3)"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("offset 2"), std::string::npos) << r.err;
}

TEST_F(Cli, MalformedDocumentReportsByte) {
  const std::string bad = write("bad.json", "{\"dims\": [2, 2],, }");
  const Outcome r = run(with({"bound", bad}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("byte"), std::string::npos);
}

TEST_F(Cli, InputAndInvariantErrors) {
  const std::string bad = write("neg.json", R"({"dims":[2],"entries":[[1.5,0],[0,0],[0,0],[-0.5,0]]})");
  const Outcome r = run(with({"bound", bad}));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("negative eigenvalue"), std::string::npos);
  EXPECT_EQ(run({"bound"}).code, 2);
  EXPECT_EQ(run({"frobnicate", "x"}).code, 2);
  EXPECT_EQ(run(with({"analyze", path("missing.json")})).code, 2);
}

TEST(CliAnalyze, Bell) {
  const Outcome r = run(with({"analyze", fixture("bell.json")}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json d = r.doc();
  EXPECT_EQ(d["command"], "analyze");
  const json& res = d["results"];
  EXPECT_NEAR(res["s_a"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(res["eof"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(res["concurrence"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(res["c_arrow"].get<double>(), 1.0, 1e-6);
  EXPECT_NEAR(res["g_arrow"].get<double>(), 1.0, 2e-3);
  EXPECT_EQ(res["separability"], "entangled");
  EXPECT_EQ(d["estimates_direction"]["g_arrow"], "upper");
  EXPECT_EQ(d["estimates_direction"]["c_arrow"], "lower");
  EXPECT_EQ(d["inputs"]["restarts"], 8);
}

TEST(CliAnalyze, PureInputIsExact) {
  const Outcome r = run(with({"analyze", fixture("bell_pure.json")}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.doc()["estimates_direction"]["eof"], "exact");
  EXPECT_NEAR(r.doc()["results"]["eof"].get<double>(), 1.0, 1e-12);
}

TEST(CliAnalyze, Product) {
  const Outcome r = run(with({"analyze", fixture("sep_product.json")}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json res = r.doc()["results"];
  EXPECT_NEAR(res["eof"].get<double>(), 0.0, 1e-9);
  EXPECT_NEAR(res["c_arrow"].get<double>(), 0.0, 1e-9);
  EXPECT_LE(res["g_arrow"].get<double>(), 2e-3);
  EXPECT_EQ(res["separability"], "separable");
}

TEST(CliBound, BellAndSeparable) {
  const Outcome bell = run(with({"bound", fixture("bell.json")}));
  ASSERT_EQ(bell.code, 0) << bell.err;
  EXPECT_EQ(bell.doc()["results"]["n_max"], 1);
  const Outcome sep = run(with({"bound", fixture("sep_classical.json")}));
  ASSERT_EQ(sep.code, 0) << sep.err;
  EXPECT_EQ(sep.doc()["results"]["n_max"], "UNBOUNDED");
  EXPECT_EQ(sep.doc()["results"]["status"], "separable");
}

TEST(CliBound, TextFormat) {
  const Outcome r = run({"bound", fixture("bell.json"), "--restarts", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("command: bound"), std::string::npos);
  EXPECT_NE(r.out.find("n_max: 1"), std::string::npos);
  EXPECT_NE(r.out.find("(upper)"), std::string::npos);
}

TEST_F(Cli, NearlySeparableWernerIsUnreliable) {
  io::write_json(path("w.json"), io::encode_state(werner_state(0.34)));
  const Outcome r = run(with({"bound", path("w.json")}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json res = r.doc()["results"];
  EXPECT_EQ(res["separability"], "entangled");
  EXPECT_EQ(res["status"], "bound unreliable: G<- below optimizer resolution");
  EXPECT_EQ(res["n_max"], "UNBOUNDED");
}

TEST(CliDuality, Fixtures) {
  const Outcome ghz = run(with({"duality", fixture("ghz.json")}));
  ASSERT_EQ(ghz.code, 0) << ghz.err;
  EXPECT_NEAR(ghz.doc()["results"]["s_a"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(ghz.doc()["results"]["eof_ab"].get<double>(), 0.0, 1e-7);
  EXPECT_NEAR(ghz.doc()["results"]["cc_ac"].get<double>(), 1.0, 1e-4);

  const Outcome dec = run(with({"duality", fixture("bell_ab_zero_c.json")}));
  ASSERT_EQ(dec.code, 0) << dec.err;
  EXPECT_NEAR(dec.doc()["results"]["residual"].get<double>(), 0.0, 1e-9);
  EXPECT_EQ(dec.doc()["results"]["within_tolerance"], true);
}

TEST(CliDuality, RejectsMixedOrBipartite) {
  for (const char* f : {"bell.json", "bell_pure.json"}) {
    const Outcome r = run(with({"duality", fixture(f)}));
    EXPECT_EQ(r.code, 2) << f;
    EXPECT_NE(r.err.find("duality requires a pure tripartite state"), std::string::npos);
  }
}

TEST_F(Cli, ExtendThenValidateThenChain) {
  const Outcome e = run(with({"extend", fixture("sep_classical.json"), "--n", "3", "--out", path("ext.json")}));
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.doc()["results"]["valid"], true);
  EXPECT_EQ(e.doc()["results"]["dims"], json({2, 2, 2, 2}));
  const auto ext = io::load_state(path("ext.json"));
  EXPECT_EQ(ext.dims, (Dims{2, 2, 2, 2}));

  const Outcome v = run(with({"validate", path("ext.json"), "--target", fixture("sep_classical.json")}));
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(v.doc()["results"]["valid"], true);

  const Outcome c = run(with({"chain", path("ext.json")}));
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.doc()["results"]["n"], 3);
  EXPECT_EQ(c.doc()["results"]["holds"], true);
}

TEST_F(Cli, ExtendSingleCopyReproducesInput) {
  ASSERT_EQ(run(with({"extend", fixture("sep_bb84.json"), "--n", "1", "--out", path("one.json")})).code, 0);
  const auto in = io::load_state(fixture("sep_bb84.json"));
  const auto out = io::load_state(path("one.json"));
  EXPECT_LE((in.state().matrix() - out.state().matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST_F(Cli, ExtendErrors) {
  json doc = json::parse(std::ifstream(fixture("sep_classical.json")));
  doc["decomposition"]["weights"] = {0.6, 0.4};
  io::write_json(path("mismatch.json"), doc);
  const Outcome m = run(with({"extend", path("mismatch.json"), "--n", "2"}));
  EXPECT_EQ(m.code, 3);
  EXPECT_NE(m.err.find("does not reproduce"), std::string::npos);

  const Outcome missing = run(with({"extend", fixture("bell.json"), "--n", "2"}));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("decomposition"), std::string::npos);

  EXPECT_EQ(run(with({"extend", fixture("sep_classical.json")})).code, 2);
  EXPECT_EQ(run(with({"extend", fixture("sep_classical.json"), "--n", "20"})).code, 2);
}

TEST_F(Cli, ValidateReportsFirstInvalidCopy) {
  const DensityMatrix bell = io::load_state(fixture("bell.json")).state();
  io::write_json(path("bad_ext.json"), io::encode_state(tensor(bell, DensityMatrix::maximally_mixed({2}))));
  const Outcome r = run(with({"validate", path("bad_ext.json"), "--target", fixture("bell.json")}));
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.doc()["results"]["valid"], false);
  EXPECT_EQ(r.doc()["results"]["first_invalid_k"], 2);
}

TEST_F(Cli, Search) {
  const Outcome bell = run(with({"search", fixture("bell.json"), "--n", "2"}));
  ASSERT_EQ(bell.code, 0) << bell.err;
  EXPECT_EQ(bell.doc()["results"]["outcome"], "not_found");
  EXPECT_GE(bell.doc()["results"]["best_deviation"].get<double>(), 1e-2);

  const Outcome sep = run(with({"search", fixture("sep_product.json"), "--n", "3", "--out", path("found.json")}));
  ASSERT_EQ(sep.code, 0) << sep.err;
  EXPECT_EQ(sep.doc()["results"]["outcome"], "found");
  const Outcome v = run(with({"validate", path("found.json"), "--target", fixture("sep_product.json")}));
  EXPECT_LE(v.doc()["results"]["deviation"].get<double>(), 1e-6);
}

TEST_F(Cli, WernerSweep) {
  const Outcome r = run(with({"sweep", "--family", "werner", "--grid", "0.9,1.0", "--out", path("w.tsv")}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json res = r.doc()["results"];
  EXPECT_EQ(res["count"], 2);
  EXPECT_EQ(res["monotone"], true);
  EXPECT_EQ(res["violations"], 0);
  EXPECT_EQ(res["rows"][1]["n_max"], 1);
  std::ifstream tsv(path("w.tsv"));
  std::string header, line, last;
  std::getline(tsv, header);
  EXPECT_EQ(header, "p\ts_a\teof\tc_arrow\tg_arrow\tn_max\tstatus\tmargin");
  while (std::getline(tsv, line)) last = line;
  EXPECT_EQ(last, "# violations=0 monotone=yes");
}

TEST(CliSweep, OtherFamilies) {
  const Outcome h = run(with({"sweep", "--family", "haar-pure", "--count", "2"}));
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_LE(h.doc()["results"]["max_abs_residual"].get<double>(), 2e-3);
  const Outcome m = run(with({"sweep", "--family", "hs-mixed", "--count", "1", "--rank", "2"}));
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_GE(m.doc()["results"]["min_slack"].get<double>(), -2e-3);
}

TEST(CliSweep, BadArguments) {
  EXPECT_EQ(run({"sweep", "--family", "ghz"}).code, 2);
  EXPECT_EQ(run({"sweep", "--family", "werner", "--grid", "1.0:0.4:0.1"}).code, 2);
  EXPECT_EQ(run({"sweep", "--family", "werner", "--grid", "0.5,2"}).code, 2);
  EXPECT_EQ(run({"sweep", "--family", "hs-mixed", "--rank", "9"}).code, 2);
}

TEST(CliReports, RoundTripAndDeterminism) {
  const auto args = with({"analyze", fixture("werner_0.8.json"), "--seed", "5"});
  const Outcome a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.doc().dump(2) + "\n", a.out);
  EXPECT_EQ(a.doc()["inputs"]["seed"], 5);
  EXPECT_FALSE(a.doc().contains("wall_time_ms"));
}

TEST(CliReports, TimingOnlyAddsWallTime) {
  const auto args = with({"bound", fixture("bell.json")});
  json plain = run(args).doc();
  json timed = run(with(args, {"--timing"})).doc();
  ASSERT_TRUE(timed.contains("wall_time_ms"));
  EXPECT_GE(timed["wall_time_ms"].get<double>(), 0.0);
  timed.erase("wall_time_ms");
  EXPECT_EQ(plain, timed);
}
