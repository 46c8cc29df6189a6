#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "ctgi/correlation.hpp"
#include "ctgi/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ctgi;

namespace {

// Parses the frozen output of the K=4 rational oracle.
std::map<std::string, std::vector<std::string>> load_k4_golden() {
  std::ifstream in(std::string(CTGI_GOLDEN_DIR) + "/k4_system.txt");
  REQUIRE(in.good());
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key, tok;
    ss >> key;
    while (ss >> tok) out[key].push_back(tok);
  }
  return out;
}

double parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stod(s);
  return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

ExposureImage make_exposure(Image values, const SuperPixelGeometry& g) {
  return ExposureImage{std::move(values), g, std::nullopt};
}

// Block-uniform scene with independent random traces per super-pixel.
Video random_block_video(const SuperPixelGeometry& g, std::size_t frames, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Image> low;
  for (std::size_t k = 0; k < frames; ++k) {
    Image f(g.n(), g.n());
    for (double& v : f.values()) v = u(gen);
    low.push_back(f);
  }
  return upsample_scene(Video(low), g);
}

Video block_truth(const Video& upsampled, const SuperPixelGeometry& g) {
  std::vector<Image> out;
  for (const Image& f : upsampled.frames()) {
    Image low(g.n(), g.n());
    for (std::size_t a = 0; a < g.n(); ++a) {
      for (std::size_t b = 0; b < g.n(); ++b) low(a, b) = f(a * g.l(), b * g.l());
    }
    out.push_back(low);
  }
  return Video(out);
}

double max_rel_error(const Video& a, const Video& b) {
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.frame_count(); ++k) {
    for (std::size_t p = 0; p < a.frame(k).size(); ++p) {
      err = std::max(err, std::abs(a.frame(k).values()[p] - b.frame(k).values()[p]));
      scale = std::max(scale, std::abs(b.frame(k).values()[p]));
    }
  }
  return err / std::max(scale, 1e-300);
}

const SuperPixelGeometry kK4Geometry(2, 2, 1);

}  // namespace

TEST_CASE("K=4 worked system matches the rational oracle") {
  auto golden = load_k4_golden();
  const ModulationBasis basis = build_hadamard_basis(kK4Geometry, HadamardOrdering::natural);
  std::vector<double> s;
  for (const auto& t : golden["exposure"]) s.push_back(parse_rational(t));
  REQUIRE(s.size() == 4);
  const ExposureImage exposure = make_exposure(Image(2, 2, s), kK4Geometry);

  const ReconstructionResult corr = reconstruct_correlation(exposure, basis);
  const ReconstructionResult exact = reconstruct_exact(exposure, basis);
  REQUIRE(corr.video.frame_count() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(corr.video.frame(k)(0, 0) == doctest::Approx(parse_rational(golden["correlation"][k])).epsilon(1e-15));
    CHECK(exact.video.frame(k)(0, 0) == doctest::Approx(parse_rational(golden["exact"][k])).epsilon(1e-12));
  }
  CHECK(exact.residual_norm < 1e-9);
  CHECK(std::stoul(golden["dc_index"][0]) == basis.constant_tiles().at(0));

  const std::vector<double> trace{1, 2, 3, 4};
  CHECK(recover_dc_frame(s, basis, trace) == doctest::Approx(parse_rational(golden["mean_exposure"][0]) - 4.5));
}

TEST_CASE("correlate_window special inputs") {
  const ModulationBasis basis = build_hadamard_basis(SuperPixelGeometry(4, 4, 1));
  SUBCASE("constant trace") {
    const double c = 0.37;
    std::vector<double> window(16, 0.0);
    for (std::size_t k = 0; k < 16; ++k) {
      for (std::size_t p = 0; p < 16; ++p) window[p] += basis.tile(k)[p] * c;
    }
    for (double v : correlate_window(window, basis)) CHECK(v == doctest::Approx(c).epsilon(1e-12));
  }
  SUBCASE("zero exposure") {
    const std::vector<double> window(16, 0.0);
    for (double v : correlate_window(window, basis)) CHECK(v == 0.0);
    const std::vector<double> trace(16, 0.0);
    CHECK(recover_dc_frame(window, basis, trace) == 0.0);
  }
  SUBCASE("zero DC policy leaves the constant frame at zero") {
    std::vector<double> window(16, 1.0);
    CHECK(correlate_window(window, basis, DcPolicy::zero)[0] == 0.0);
  }
  SUBCASE("window size mismatch") {
    const std::vector<double> window(9, 0.0);
    CHECK_THROWS_AS(correlate_window(window, basis), std::invalid_argument);
  }
}

TEST_CASE("degenerate bases are reported with the offending frame") {
  const SuperPixelGeometry g(2, 2, 1);
  const std::vector<double> window{1, 2, 3, 4};
  SUBCASE("two constant tiles") {
    const ModulationBasis b(BasisKind::random_binary, HadamardOrdering::natural, g,
                            {Tile{1, 0, 1, 0}, Tile{1, 1, 1, 1}, Tile{0, 1, 1, 0}, Tile{0, 0, 0, 0}});
    try {
      correlate_window(window, b);
      FAIL("expected DegeneratePatternError");
    } catch (const DegeneratePatternError& e) {
      CHECK(e.frame() == 3);
    }
    // Zero policy drops constant frames instead.
    CHECK_NOTHROW(correlate_window(window, b, DcPolicy::zero));
  }
  SUBCASE("all-off constant tile") {
    const ModulationBasis b(BasisKind::random_binary, HadamardOrdering::natural, g,
                            {Tile{1, 0, 1, 0}, Tile{0, 0, 0, 0}});
    CHECK_THROWS_AS(correlate_window(window, b), DegeneratePatternError);
  }
}

TEST_CASE("exact mode") {
  SUBCASE("K=1 all-ones pattern returns the exposure value") {
    const SuperPixelGeometry g(6, 3, 2);
    const ModulationBasis b(BasisKind::random_binary, HadamardOrdering::natural, g, {Tile(9, 1)});
    Image s(6, 6);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) s(i, j) = 1.0 + (i / 3) * 2 + (j / 3);
    }
    const ReconstructionResult r = reconstruct_exact(make_exposure(s, g), b);
    CHECK(r.video.frame(0) == Image(2, 2, {1, 2, 3, 4}));
  }
  SUBCASE("rank deficient") {
    const ModulationBasis b(BasisKind::random_binary, HadamardOrdering::natural, kK4Geometry,
                            {Tile{1, 0, 1, 0}, Tile{1, 0, 1, 0}});
    try {
      reconstruct_exact(make_exposure(Image(2, 2, 1.0), kK4Geometry), b);
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(std::string(e.what()).find("compressive") != std::string::npos);
    }
    const ModulationBasis under = build_random_basis(kK4Geometry, 6, 1);
    CHECK_THROWS_AS(reconstruct_exact(make_exposure(Image(2, 2, 1.0), kK4Geometry), under),
                    RankDeficientError);
  }
  SUBCASE("geometry mismatch") {
    const ModulationBasis b = build_hadamard_basis(SuperPixelGeometry(4, 2, 2));
    CHECK_THROWS_AS(reconstruct_exact(make_exposure(Image(2, 2), kK4Geometry), b),
                    std::invalid_argument);
    CHECK_THROWS_AS(reconstruct_correlation(make_exposure(Image(2, 2), kK4Geometry), b),
                    std::invalid_argument);
  }
}

TEST_CASE("full-rate Hadamard: correlation and exact modes recover the truth") {
  std::mt19937_64 gen(17);
  for (std::size_t l : {2u, 4u, 8u}) {
    const SuperPixelGeometry g = SuperPixelGeometry::from_superpixels(l, 3);
    const ModulationBasis basis = build_hadamard_basis(g);
    const Video scene = random_block_video(g, l * l, gen);
    const Video truth = block_truth(scene, g);
    const ExposureImage s = modulate_accumulate(scene, basis);
    const ReconstructionResult corr = reconstruct_correlation(s, basis);
    const ReconstructionResult exact = reconstruct_exact(s, basis);
    CHECK(corr.video.rows() == 3);
    CHECK(corr.video.frame_count() == l * l);
    CHECK(max_rel_error(corr.video, truth) <= 1e-9);
    CHECK(max_rel_error(exact.video, truth) <= 1e-9);
    CHECK(max_rel_error(corr.video, exact.video) <= 1e-9);
    CHECK(corr.stats.size() == l * l);
  }
}

TEST_CASE("super-pixel locality") {
  std::mt19937_64 gen(5);
  const SuperPixelGeometry g(12, 4, 3);
  const ModulationBasis basis = build_random_basis(g, 20, 3);
  const Video scene = random_block_video(g, 20, gen);
  std::vector<Image> changed = scene.frames();
  for (Image& f : changed) {
    for (std::size_t i = 4; i < 8; ++i) {
      for (std::size_t j = 8; j < 12; ++j) f(i, j) += 0.5;
    }
  }
  const Video a = reconstruct_correlation(modulate_accumulate(scene, basis), basis, DcPolicy::zero).video;
  const Video b = reconstruct_correlation(modulate_accumulate(Video(changed), basis), basis, DcPolicy::zero).video;
  bool touched = false;
  for (std::size_t k = 0; k < 20; ++k) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        if (r == 1 && c == 2) {
          touched |= a.frame(k)(r, c) != b.frame(k)(r, c);
        } else {
          CHECK(a.frame(k)(r, c) == b.frame(k)(r, c));
        }
      }
    }
  }
  CHECK(touched);
}

TEST_CASE("permutation equivariance") {
  std::mt19937_64 gen(8);
  const SuperPixelGeometry g(8, 4, 2);
  const ModulationBasis basis = build_hadamard_basis(g);
  const Video scene = random_block_video(g, 16, gen);
  std::vector<std::size_t> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<Tile> tiles;
  std::vector<Image> frames;
  for (std::size_t k : perm) {
    tiles.push_back(basis.tile(k));
    frames.push_back(scene.frame(k));
  }
  const ModulationBasis permuted(BasisKind::walsh_hadamard, basis.ordering(), g, tiles);
  const Video a = reconstruct_correlation(modulate_accumulate(scene, basis), basis).video;
  const Video b = reconstruct_correlation(modulate_accumulate(Video(frames), permuted), permuted).video;
  for (std::size_t k = 0; k < 16; ++k) {
    for (std::size_t p = 0; p < 4; ++p) {
      CHECK(b.frame(k).values()[p] == doctest::Approx(a.frame(perm[k]).values()[p]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sliding mode") {
  SUBCASE("output shapes") {
    const SuperPixelGeometry g(4, 2, 2);
    const ModulationBasis basis = build_hadamard_basis(g);
    const ReconstructionResult r = reconstruct_sliding(make_exposure(Image(4, 4, 1.0), g), basis);
    CHECK(r.video.rows() == 3);
    CHECK(r.video.cols() == 3);
    CHECK(r.video.frame_count() == 4);
    CHECK(r.mode == ReconstructionMode::sliding);

    const SuperPixelGeometry g64(64, 8, 8);
    const ModulationBasis b64 = build_hadamard_basis(g64);
    CHECK(reconstruct_sliding(make_exposure(Image(64, 64), g64), b64).video.rows() == 57);
  }
  SUBCASE("aligned windows reproduce block mode bit for bit") {
    std::mt19937_64 gen(23);
    const SuperPixelGeometry g(32, 8, 4);
    const ModulationBasis basis = build_hadamard_basis(g);
    const ExposureImage s = modulate_accumulate(random_block_video(g, 64, gen), basis);
    const Video block = reconstruct_correlation(s, basis).video;
    const Video slide = reconstruct_sliding(s, basis).video;
    for (std::size_t k = 0; k < 64; ++k) {
      for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) CHECK(slide.frame(k)(a * 8, b * 8) == block.frame(k)(a, b));
      }
    }
  }
  SUBCASE("every window equals a correlation with the cropped masks") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SuperPixelGeometry g(8, 4, 2);
    const ModulationBasis basis = build_hadamard_basis(g);
    Image s(8, 8);
    for (double& v : s.values()) v = u(gen);
    const Video slide = reconstruct_sliding(make_exposure(s, g), basis).video;
    for (std::size_t r = 0; r <= 4; ++r) {
      for (std::size_t c = 0; c <= 4; ++c) {
        std::vector<Tile> crops;
        for (std::size_t k = 0; k < 16; ++k) {
          Tile t(16);
          for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) t[i * 4 + j] = basis.at(k, r + i, c + j);
          }
          crops.push_back(t);
        }
        const ModulationBasis cropped(BasisKind::random_binary, HadamardOrdering::natural,
                                      SuperPixelGeometry(4, 4, 1), crops);
        std::vector<double> window;
        for (std::size_t i = 0; i < 4; ++i) {
          for (std::size_t j = 0; j < 4; ++j) window.push_back(s(r + i, c + j));
        }
        const TemporalTrace t = correlate_window(window, cropped);
        for (std::size_t k = 0; k < 16; ++k) {
          CHECK(slide.frame(k)(r, c) == doctest::Approx(t[k]).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("non-periodic bases are refused") {
    const SuperPixelGeometry g(4, 2, 2);
    CHECK_THROWS_AS(reconstruct_sliding(make_exposure(Image(4, 4), g), build_random_basis(g, 4, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(reconstruct_sliding(make_exposure(Image(4, 4), g),
                                        build_hadamard_basis(g, HadamardOrdering::sequency, 3)),
                    std::invalid_argument);
  }
}

TEST_CASE("bit-identical results for any worker count") {
  std::mt19937_64 gen(41);
  const SuperPixelGeometry g(24, 4, 6);
  const ModulationBasis basis = build_hadamard_basis(g);
  const ExposureImage s = modulate_accumulate(random_block_video(g, 16, gen), basis);
  CHECK(reconstruct_correlation(s, basis, DcPolicy::formula, {1}).video ==
        reconstruct_correlation(s, basis, DcPolicy::formula, {3}).video);
  CHECK(reconstruct_exact(s, basis, {1}).video == reconstruct_exact(s, basis, {4}).video);
  CHECK(reconstruct_sliding(s, basis, DcPolicy::formula, {1}).video ==
        reconstruct_sliding(s, basis, DcPolicy::formula, {5}).video);
}

TEST_CASE("apply_threshold") {
  ReconstructionResult base;
  base.video = Video({Image(1, 5, {-0.2, 0.1, 0.5, 1.0, 0.05}), Image(1, 5, {2.0, 2.0, 0.0, 1.0, 0.3})});

  CHECK(apply_threshold(base, 0.0).video == base.video);
  CHECK_THROWS_AS(apply_threshold(base, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(apply_threshold(base, 1.1), std::invalid_argument);

  const ReconstructionResult one = apply_threshold(base, 1.0);
  CHECK(one.video.frame(0) == Image(1, 5, {0, 0, 0, 1.0, 0}));
  CHECK(one.video.frame(1) == Image(1, 5, {2.0, 2.0, 0, 0, 0}));
  CHECK(one.threshold == 1.0);

  // An object at full brightness trailed by a ghost at 10 % of the peak.
  Image frame(6, 6);
  for (std::size_t i = 1; i < 3; ++i) {
    for (std::size_t j = 1; j < 3; ++j) frame(i, j) = 0.8;
  }
  for (std::size_t i = 3; i < 5; ++i) {
    for (std::size_t j = 1; j < 3; ++j) frame(i, j) = 0.08;
  }
  ReconstructionResult ghost;
  ghost.video = Video({frame});
  const Image cleaned = apply_threshold(ghost, 0.2).video.frame(0);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const bool object = i >= 1 && i < 3 && j >= 1 && j < 3;
      CHECK(cleaned(i, j) == (object ? 0.8 : 0.0));
    }
  }
}
