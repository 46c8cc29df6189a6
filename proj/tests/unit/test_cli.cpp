#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "ctgi/demo.hpp"
#include "ctgi/io.hpp"
#include "doctest.h"

using namespace ctgi;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string("\"") + CTGI_CLI_PATH + "\" " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ctgi_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen-basis prints the sampling plan") {
  TempDir dir;
  RunResult r = run("gen-basis --kind hadamard --l 8 --n 128 --out " + (dir / "h.ctgb"));
  CHECK(r.code == 0);
  CHECK(r.output.find("T = 1\n") != std::string::npos);
  CHECK(io::read_basis(dir / "h.ctgb").frame_count() == 64);

  r = run("gen-basis --kind random --l 4 --K 64 --out " + (dir / "r.ctgb"));
  CHECK(r.code == 0);
  CHECK(r.output.find("sampling rate 25%") != std::string::npos);
  CHECK(r.output.find("T = 4\n") != std::string::npos);

  r = run("gen-basis --kind random --l 7 --K 64 --out " + (dir / "r7.ctgb"));
  CHECK(r.output.find("T = 1.306") != std::string::npos);
  CHECK(r.output.find("sampling rate 76.56%") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  TempDir dir;
  CHECK(run("gen-basis --kind hadamard --l 8").code == 2);
  CHECK(run("gen-basis --kind bogus --l 8 --out " + (dir / "x")).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
  CHECK(run("gen-basis --kind hadamard --l 3 --out " + (dir / "x")).code == 2);
}

TEST_CASE("simulate and reconstruct round trip") {
  TempDir dir;
  const SuperPixelGeometry g(32, 4, 8);
  const Video scene = demo::moving_square_scene(8, 16, 3);
  io::write_frame_sequence(dir / "scene", scene, 8, false);
  REQUIRE(run("gen-basis --kind hadamard --l 4 --n 8 --out " + (dir / "b.ctgb")).code == 0);

  RunResult r = run("simulate --scene " + (dir / "scene") + " --basis " + (dir / "b.ctgb") +
                    " --out-exposure " + (dir / "s.ctge") + " --out-blur " + (dir / "blur.pgm"));
  REQUIRE(r.code == 0);
  CHECK(io::read_exposure(dir / "s.ctge").rows() == 32);
  CHECK(io::read_pgm(dir / "blur.pgm").rows() == 32);

  for (const std::string mode : {"correlation", "exact"}) {
    const std::string out = dir / ("rec_" + mode);
    r = run("reconstruct --exposure " + (dir / "s.ctge") + " --basis " + (dir / "b.ctgb") +
            " --mode " + mode + " --out " + out + " --truth " + (dir / "scene"));
    REQUIRE(r.code == 0);
    const Video back = io::read_frame_sequence(out);
    CHECK(back.frame_count() == 16);
    const MetricsReport m = compute_metrics(back, scene);
    CHECK(m.mean_psnr >= 80.0);
    const auto text = io::read_file(fs::path(out) / "metrics.txt");
    CHECK(std::string(text.begin(), text.end()).find("frames=16\n") != std::string::npos);
  }

  r = run("metrics --recon " + (dir / "scene") + " --truth " + (dir / "scene") + " --out " + (dir / "m.txt"));
  CHECK(r.code == 0);
  const auto m = io::read_file(dir / "m.txt");
  CHECK(std::string(m.begin(), m.end()).find("mean_psnr_db=inf\n") != std::string::npos);

  r = run("reconstruct --exposure " + (dir / "s.ctge") + " --basis " + (dir / "b.ctgb") +
          " --mode sliding --out " + (dir / "slide"));
  CHECK(r.code == 0);
  CHECK(io::read_frame_sequence(dir / "slide").rows() == 29);
}

TEST_CASE("mismatches are runtime errors naming the expected K") {
  TempDir dir;
  io::write_frame_sequence(dir / "scene", demo::moving_square_scene(8, 5, 1), 8, false);
  REQUIRE(run("gen-basis --kind hadamard --l 4 --n 8 --out " + (dir / "b.ctgb")).code == 0);
  const RunResult r = run("simulate --scene " + (dir / "scene") + " --basis " + (dir / "b.ctgb") +
                          " --out-exposure " + (dir / "s.ctge"));
  CHECK(r.code == 1);
  CHECK(r.output.find("K=16") != std::string::npos);
  CHECK(run("reconstruct --exposure " + (dir / "missing.ctge") + " --basis " + (dir / "b.ctgb") +
            " --out " + (dir / "o")).code == 1);
}

TEST_CASE("sliding mode refuses a random basis") {
  TempDir dir;
  REQUIRE(run("gen-basis --kind random --l 2 --K 4 --n 2 --out " + (dir / "b.ctgb")).code == 0);
  io::write_exposure(dir / "s.ctge", Image(4, 4, 1.0));
  const RunResult r = run("reconstruct --exposure " + (dir / "s.ctge") + " --basis " + (dir / "b.ctgb") +
                          " --mode sliding --out " + (dir / "o"));
  CHECK(r.code == 2);
  CHECK(r.output.find("sliding") != std::string::npos);
}

TEST_CASE("K=1 exposure equals the masked frame") {
  TempDir dir;
  const Video scene({Image(2, 2, {0.2, 0.4, 0.6, 0.8})});
  io::write_frame_sequence(dir / "scene", scene, 8, true);
  REQUIRE(run("gen-basis --kind hadamard --l 1 --n 2 --out " + (dir / "b.ctgb")).code == 0);
  REQUIRE(run("simulate --scene " + (dir / "scene") + " --basis " + (dir / "b.ctgb") +
              " --out-exposure " + (dir / "s.ctge")).code == 0);
  const Image s = io::read_exposure(dir / "s.ctge");
  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(s.values()[p] == static_cast<double>(static_cast<float>(scene.frame(0).values()[p])));
  }
}

TEST_CASE("identical flags and seeds give identical bytes") {
  TempDir a, b;
  for (const TempDir* d : {&a, &b}) {
    io::write_frame_sequence(d->path / "scene", demo::falling_disk_scene(4, 16, 2), 8, false);
    REQUIRE(run("gen-basis --kind random --l 3 --K 16 --n 4 --seed 9 --out " + (*d / "b.ctgb")).code == 0);
    REQUIRE(run("simulate --scene " + (*d / "scene") + " --basis " + (*d / "b.ctgb") +
                " --noise gaussian --sigma 0.01 --seed 5 --out-exposure " + (*d / "s.ctge")).code == 0);
    REQUIRE(run("--threads 2 reconstruct --exposure " + (*d / "s.ctge") + " --basis " + (*d / "b.ctgb") +
                " --mode cs --max-iters 200 --out " + (*d / "rec") + " --truth " + (*d / "scene")).code == 0);
  }
  for (const std::string f : {"b.ctgb", "s.ctge", "rec/frame_0001.pgm", "rec/frame_0016.f32", "rec/metrics.txt"}) {
    CHECK_MESSAGE(io::read_file(a / f) == io::read_file(b / f), f);
  }
}

TEST_CASE("demo sim 3 reports the sliding output side") {
  TempDir dir;
  const RunResult r = run("demo --paper-sim 3 --scale 0.0625 --out " + dir.path.string());
  CHECK(r.code == 0);
  const auto text = io::read_file(dir / "summary_sim3.txt");
  CHECK(std::string(text.begin(), text.end()).find("output_side=15\n") != std::string::npos);
}
