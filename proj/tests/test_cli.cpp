#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msr/cli.hpp"
#include "msr/dataset_io.hpp"
#include "msr/evaluation.hpp"
#include "msr/searchlight.hpp"
#include "msr/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "msr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = msr::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("msr_cli_" + std::to_string(std::rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("generate is byte-identical for a seed") {
  TempDir dir;
  const Result a = run({"generate", "--preset", "planted-small", "--seed", "7", "--out", dir / "a.msrd"});
  const Result b = run({"generate", "--preset", "planted-small", "--seed", "7", "--out", dir / "b.msrd"});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "a.msrd") == slurp(dir / "b.msrd"));
  CHECK(slurp(dir / "a.msrd.truth") == slurp(dir / "b.msrd.truth"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a.msrd.manifest.json"));
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["parameters"]["preset"] == "planted-small");
  CHECK(manifest["outputs"][0]["sha256"] == msr::sha256_file(dir / "a.msrd"));
}

TEST_CASE("sweep finds the planted region") {
  TempDir dir;
  REQUIRE(run({"generate", "--preset", "planted-small", "--seed", "7", "--out", dir / "d.msrd"}).code == 0);
  const Result s =
      run({"sweep", "--data", dir / "d.msrd", "--model", "srm", "--k-grid", "10,25", "--out", dir / "m.msrm"});
  REQUIRE(s.code == 0);
  std::istringstream csv(slurp(dir / "m.msrm.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x,y,z,accuracy,k");
  double best = -1;
  int bx = -1, by = -1, bz = -1;
  while (std::getline(csv, line)) {
    int x, y, z, k;
    double acc;
    char c;
    std::istringstream ls(line);
    ls >> x >> c >> y >> c >> z >> c >> acc >> c >> k;
    if (acc > best) {
      best = acc;
      bx = x;
      by = y;
      bz = z;
    }
  }
  // The sweep runs on the downsampled grid; map the center back.
  const msr::GroundTruth truth = msr::load_truth(dir / "d.msrd.truth");
  const auto& region = truth.regions[0].region;
  for (auto [c, lo, hi] : {std::tuple{bx, region.lo.x, region.hi.x}, std::tuple{by, region.lo.y, region.hi.y},
                           std::tuple{bz, region.lo.z, region.hi.z}}) {
    CHECK(2 * c + 1 >= static_cast<int>(lo));
    CHECK(2 * c < static_cast<int>(hi));
  }

  const Result r = run({"report", "--maps", dir / "m.msrm", "--threshold", "0.5", "--top", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("top 3 centers") != std::string::npos);
  CHECK(fs::exists(dir / "m.msrm.thresholded.csv"));
  CHECK(fs::exists(dir / "m.msrm.summary.txt"));
}

TEST_CASE("evaluate reports the chance rate") {
  TempDir dir;
  REQUIRE(run({"generate", "--dims", "6,6,6", "--subjects", "3", "--trs", "50", "--region", "0,0,0,6,6,6,3,5",
               "--out", dir / "d.msrd"})
              .code == 0);
  const Result e = run({"evaluate", "--data", dir / "d.msrd", "--no-downsample", "--protocol", "time-segment",
                        "--segment-len", "9", "--k", "3", "--out", dir / "r.csv"});
  REQUIRE(e.code == 0);
  std::istringstream csv(slurp(dir / "r.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "protocol,model,k,accuracy,chance,n_trials,seed");
  std::vector<std::string> cols;
  std::istringstream rs(row);
  for (std::string c; std::getline(rs, c, ',');) cols.push_back(c);
  REQUIRE(cols.size() == 7);
  // 25 TRs per half, 17 candidate starts.
  CHECK(std::stod(cols[4]) == doctest::Approx(1.0 / 17));
  CHECK(cols[5] == std::to_string(3 * 2 * 17));

  const Result f = run({"fit", "--data", dir / "d.msrd", "--no-downsample", "--model", "srica", "--k", "3",
                        "--center", "2,2,2", "--out", dir / "f.msrf"});
  CHECK(f.code == 0);
  const Result ef = run({"evaluate", "--data", dir / "d.msrd", "--no-downsample", "--fit", dir / "f.msrf",
                         "--center", "2,2,2", "--segment-len", "5", "--out", dir / "rf.csv"});
  CHECK(ef.code == 0);
  CHECK(slurp(dir / "rf.csv").find("time-segment,sr-ica,3,") != std::string::npos);
}

TEST_CASE("config files are overridden by flags") {
  TempDir dir;
  {
    std::ofstream cfg(dir / "gen.cfg");
    cfg << "# synthetic run\ndims = 5,5,5\nsubjects=3\ntrs=40\nseed=11\n";
  }
  REQUIRE(run({"generate", "--config", dir / "gen.cfg", "--seed", "12", "--out", dir / "a.msrd"}).code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "a.msrd.manifest.json"));
  CHECK(m["seed"] == 12);
  CHECK(m["parameters"]["trs"] == "40");
  const msr::SubjectDataset d = msr::load_dataset(dir / "a.msrd");
  CHECK(d.subject_count() == 3);
  CHECK(d.tr_count() == 40);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "frobnicate=1\n";
  }
  CHECK(run({"generate", "--config", dir / "bad.cfg", "--out", dir / "b.msrd"}).code == 2);
}

TEST_CASE("threads come from the environment when not given") {
  TempDir dir;
  REQUIRE(run({"generate", "--dims", "6,5,5", "--subjects", "3", "--trs", "30", "--out", dir / "d.msrd"}).code == 0);
  ::setenv("MSR_THREADS", "3", 1);
  const Result s = run({"sweep", "--data", dir / "d.msrd", "--no-downsample", "--k-grid", "2", "--segment-len", "5",
                        "--out", dir / "a.msrm"});
  ::unsetenv("MSR_THREADS");
  REQUIRE(s.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "a.msrm.manifest.json"))["threads"] == 3);
  const Result t = run({"sweep", "--data", dir / "d.msrd", "--no-downsample", "--k-grid", "2", "--segment-len", "5",
                        "--threads", "1", "--out", dir / "b.msrm"});
  REQUIRE(t.code == 0);
  CHECK(slurp(dir / "a.msrm") == slurp(dir / "b.msrm"));
}

TEST_CASE("errors and exit codes") {
  TempDir dir;
  const Result unknown = run({"sweep", "--data", "x", "--out", "y", "--frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find('\n') == unknown.err.size() - 1);
  CHECK(run({}).code == 2);
  CHECK(run({"fit", "--out", dir / "f"}).code == 2);

  const Result missing = run({"fit", "--data", dir / "nope.msrd", "--out", dir / "f"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("FormatError") != std::string::npos);

  const Result spec = run({"generate", "--dims", "4,4,4", "--region", "0,0,0,5,5,5", "--out", dir / "g.msrd"});
  CHECK(spec.code == 1);
  CHECK(spec.err.find("SpecError") != std::string::npos);

  REQUIRE(run({"generate", "--dims", "5,5,5", "--subjects", "2", "--trs", "20", "--out", dir / "s.msrd"}).code == 0);
  const Result rank = run({"fit", "--data", dir / "s.msrd", "--no-downsample", "--k", "50", "--out", dir / "f"});
  CHECK(rank.code == 1);
  CHECK(rank.err.find("RankError") != std::string::npos);

  CHECK(run({"--help"}).code == 0);
}
