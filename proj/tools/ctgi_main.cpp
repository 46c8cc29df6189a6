// ctgi: simulate single-exposure temporal ghost imaging and recover the
// sub-frames. Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ctgi/basis.hpp"
#include "ctgi/compressive.hpp"
#include "ctgi/correlation.hpp"
#include "ctgi/demo.hpp"
#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/metrics.hpp"
#include "ctgi/scene.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed_trimmed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

void print_plan(const ctgi::SamplingPlan& plan) {
  std::cout << "T = " << fixed_trimmed(plan.transfer_efficiency, 3) << "\n"
            << "sampling rate " << fixed_trimmed(100.0 * plan.sampling_rate, 2) << "%\n";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct GenBasisArgs {
  std::string kind;
  std::optional<std::size_t> frames;
  std::string ordering = "walsh";
  std::size_t l = 0;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  double density = 0.5;
  std::string out;
};

int run_gen_basis(const GenBasisArgs& a) {
  const auto geometry = ctgi::SuperPixelGeometry::from_superpixels(a.l, a.n);
  std::optional<ctgi::ModulationBasis> basis;
  if (a.kind == "hadamard") {
    const std::size_t area = a.l * a.l;
    if (a.frames && *a.frames > area) {
      throw UsageError("--order " + std::to_string(*a.frames) + " exceeds l^2 = " +
                       std::to_string(area) + " for a Hadamard basis");
    }
    if ((area & (area - 1)) != 0) {
      throw UsageError("Hadamard basis needs l^2 to be a power of two (l = 1, 2, 4, 8, ...)");
    }
    const auto ordering = a.ordering == "natural" ? ctgi::HadamardOrdering::natural
                                                  : ctgi::HadamardOrdering::sequency;
    basis = ctgi::build_hadamard_basis(geometry, ordering, a.frames);
  } else {
    if (!(a.density > 0.0 && a.density < 1.0)) throw UsageError("--density must be in (0, 1)");
    basis = ctgi::build_random_basis(geometry, a.frames.value_or(a.l * a.l), a.seed, a.density);
  }
  ctgi::io::write_basis(a.out, *basis);
  std::cout << "basis: kind=" << a.kind << " K=" << basis->frame_count() << " l=" << a.l
            << " n=" << a.n << " m=" << geometry.m() << "\n";
  print_plan(ctgi::plan_sampling(basis->frame_count(), a.l));
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

struct SimulateArgs {
  std::string scene;
  std::string basis;
  std::string noise = "none";
  double sigma = 0.0;
  double poisson_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out_exposure;
  std::string out_blur;
};

int run_simulate(const SimulateArgs& a, ctgi::Parallelism par) {
  const ctgi::ModulationBasis basis = ctgi::io::read_basis(a.basis);
  const ctgi::SuperPixelGeometry& g = basis.geometry();
  ctgi::Video scene = ctgi::io::read_frame_sequence(a.scene);
  if (scene.frame_count() != basis.frame_count()) {
    throw ctgi::Error("scene has " + std::to_string(scene.frame_count()) +
                      " frames but the basis expects K=" + std::to_string(basis.frame_count()));
  }
  if (scene.rows() == g.n() && scene.cols() == g.n()) {
    scene = ctgi::upsample_scene(scene, g);
  } else if (scene.rows() != g.m() || scene.cols() != g.m()) {
    throw ctgi::Error("scene frames are " + std::to_string(scene.rows()) + "x" +
                      std::to_string(scene.cols()) + "; expected " + std::to_string(g.n()) +
                      "x" + std::to_string(g.n()) + " or " + std::to_string(g.m()) + "x" +
                      std::to_string(g.m()));
  }
  ctgi::ExposureImage exposure = ctgi::modulate_accumulate(scene, basis, par);
  ctgi::NoiseModel model;
  if (a.noise == "gaussian") {
    model = ctgi::NoiseModel::gaussian(a.sigma, a.seed);
  } else if (a.noise == "poisson") {
    model = ctgi::NoiseModel::poisson(a.poisson_scale, a.seed);
  }
  exposure = ctgi::add_noise(exposure, model);
  ctgi::io::write_exposure(a.out_exposure, exposure.values);
  std::cout << "exposure " << g.m() << "x" << g.m() << " from K=" << basis.frame_count()
            << " frames -> " << a.out_exposure << "\n";
  if (!a.out_blur.empty()) {
    ctgi::Image blur = ctgi::direct_capture(scene);
    const double inv = 1.0 / static_cast<double>(scene.frame_count());
    for (double& v : blur.values()) v *= inv;
    ctgi::io::write_pgm(a.out_blur, blur, 16);
    std::cout << "direct capture (time-averaged) -> " << a.out_blur << "\n";
  }
  return 0;
}

struct ReconstructArgs {
  std::string exposure;
  std::string basis;
  std::string mode = "correlation";
  std::string dc = "formula";
  std::optional<double> lambda;
  double lambda_rel = 0.01;
  std::string tv = "temporal";
  double tau = 0.0;
  std::string out;
  std::string truth;
  std::size_t max_iters = 2000;
  double rel_tol = 1e-8;
  bool timings = false;
};

int run_reconstruct(const ReconstructArgs& a, ctgi::Parallelism par) {
  const ctgi::ModulationBasis basis = ctgi::io::read_basis(a.basis);
  const ctgi::SuperPixelGeometry& g = basis.geometry();
  if (a.mode == "sliding" && (basis.kind() != ctgi::BasisKind::walsh_hadamard ||
                              basis.frame_count() != g.l() * g.l())) {
    throw UsageError("--mode sliding needs a full Walsh-Hadamard basis (K = l^2): only its "
                     "l-periodic complete tiling makes every l x l window a complete basis");
  }
  ctgi::Image values = ctgi::io::read_exposure(a.exposure);
  if (values.rows() != g.m()) {
    throw ctgi::Error("exposure is " + std::to_string(values.rows()) + "x" +
                      std::to_string(values.cols()) + " but the basis modulates " +
                      std::to_string(g.m()) + "x" + std::to_string(g.m()));
  }
  const ctgi::ExposureImage exposure{std::move(values), g, std::nullopt};
  const auto dc = a.dc == "zero" ? ctgi::DcPolicy::zero : ctgi::DcPolicy::formula;

  const auto start = std::chrono::steady_clock::now();
  ctgi::ReconstructionResult result;
  if (a.mode == "correlation") {
    result = ctgi::reconstruct_correlation(exposure, basis, dc, par);
  } else if (a.mode == "exact") {
    result = ctgi::reconstruct_exact(exposure, basis, par);
  } else if (a.mode == "sliding") {
    result = ctgi::reconstruct_sliding(exposure, basis, dc, par);
  } else {
    ctgi::SolverOptions opts;
    opts.max_iters = a.max_iters;
    opts.rel_tol = a.rel_tol;
    const auto tv = a.tv == "spatial" ? ctgi::TvMode::spatial : ctgi::TvMode::temporal;
    result = ctgi::reconstruct_cs(exposure, basis, {a.lambda, a.lambda_rel}, tv, opts, par);
  }
  if (a.tau > 0.0) result = ctgi::apply_threshold(std::move(result), a.tau);
  const double t_recon = seconds_since(start);

  ctgi::io::write_frame_sequence(a.out, result.video, 16, true);
  std::cout << "reconstructed " << result.video.frame_count() << " frames of "
            << result.video.rows() << "x" << result.video.cols() << " (" << a.mode
            << ") -> " << a.out << "\n";
  if (result.mode == ctgi::ReconstructionMode::exact) {
    std::cout << "max residual norm " << ctgi::format_number(result.residual_norm) << "\n";
  }

  if (!a.truth.empty()) {
    ctgi::Video truth = ctgi::io::read_frame_sequence(a.truth);
    if (result.mode == ctgi::ReconstructionMode::sliding && truth.rows() == g.m()) {
      std::vector<ctgi::Image> windows;
      for (const auto& f : truth.frames()) windows.push_back(ctgi::demo::window_mean(f, g.l()));
      truth = ctgi::Video(std::move(windows));
    }
    ctgi::MetricsReport report = ctgi::compute_metrics(result.video, truth);
    report.stage_seconds = {{"reconstruct", t_recon}};
    const fs::path metrics_path = fs::path(a.out) / "metrics.txt";
    const std::string text = ctgi::format_metrics(report, a.timings);
    ctgi::io::write_file_atomic(
        metrics_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    std::cout << "mean PSNR " << ctgi::format_number(report.mean_psnr) << " dB, mean RMSE "
              << ctgi::format_number(report.mean_rmse) << ", mean Pearson "
              << ctgi::format_number(report.mean_pearson) << "\n"
              << "metrics -> " << metrics_path.string() << "\n";
  }
  return 0;
}

int run_metrics(const std::string& recon_dir, const std::string& truth_dir,
                const std::string& out) {
  const ctgi::Video recon = ctgi::io::read_frame_sequence(recon_dir);
  const ctgi::Video truth = ctgi::io::read_frame_sequence(truth_dir);
  ctgi::MetricsReport report;
  try {
    report = ctgi::compute_metrics(recon, truth);
  } catch (const std::invalid_argument& e) {
    throw ctgi::Error(e.what());
  }
  std::cout << "frame    psnr_db      rmse         pearson\n";
  for (std::size_t k = 0; k < report.frames.size(); ++k) {
    const auto& f = report.frames[k];
    char line[128];
    std::snprintf(line, sizeof(line), "%5zu  %10s  %12s  %10s\n", k + 1,
                  ctgi::format_number(f.psnr).c_str(), ctgi::format_number(f.rmse).c_str(),
                  ctgi::format_number(f.pearson).c_str());
    std::cout << line;
  }
  const std::string text = ctgi::format_metrics(report);
  std::cout << text;
  if (!out.empty()) {
    ctgi::io::write_file_atomic(
        out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return 0;
}

struct DemoArgs {
  int sim = 1;
  double scale = 0.25;
  std::uint64_t seed = 1;
  double tau = 0.2;
  std::size_t max_iters = 300;
  std::string out = "demo_out";
};

int run_demo(const DemoArgs& a, ctgi::Parallelism par) {
  ctgi::demo::DemoConfig config;
  config.scale = a.scale;
  config.seed = a.seed;
  config.par = par;
  std::string summary;
  try {
    if (a.sim == 1) {
      summary = ctgi::demo::format_summary(ctgi::demo::run_hadamard_demo(config));
    } else if (a.sim == 2) {
      ctgi::SolverOptions opts;
      opts.max_iters = a.max_iters;
      opts.rel_tol = 1e-6;
      const auto sweep = ctgi::demo::run_compressive_demo(config, opts);
      summary = ctgi::demo::format_summary(sweep);
      bool monotone = true;
      for (std::size_t i = 1; i < sweep.size(); ++i) {
        monotone = monotone && sweep[i].metrics.mean_psnr >= sweep[i - 1].metrics.mean_psnr;
      }
      summary += std::string("psnr_monotone=") + (monotone ? "true" : "false") + "\n";
    } else {
      summary = ctgi::demo::format_summary(ctgi::demo::run_sliding_demo(config, a.tau));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(a.out);
  const fs::path path = fs::path(a.out) / ("summary_sim" + std::to_string(a.sim) + ".txt");
  ctgi::io::write_file_atomic(
      path, std::span(reinterpret_cast<const std::uint8_t*>(summary.data()), summary.size()));
  std::cout << summary << "summary -> " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctgi - single-exposure temporal ghost imaging simulator and reconstructor"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  GenBasisArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-basis", "Generate a modulation basis file");
  gen_cmd->add_option("--kind", gen.kind, "hadamard or random")
      ->required()
      ->check(CLI::IsMember({"hadamard", "random"}));
  gen_cmd->add_option("--order,--K", gen.frames, "Number of patterns K (default l^2)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--ordering", gen.ordering, "walsh (sequency) or natural")
      ->check(CLI::IsMember({"walsh", "natural"}));
  gen_cmd->add_option("--l", gen.l, "Super-pixel side")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n", gen.n, "Scene side in super-pixels")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random basis seed");
  gen_cmd->add_option("--density", gen.density, "Random basis on-probability");
  gen_cmd->add_option("--out", gen.out, "Output .ctgb file")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Modulate a scene and accumulate one exposure");
  sim_cmd->add_option("--scene", sim.scene, "Directory of frame_0001.pgm ...")->required();
  sim_cmd->add_option("--basis", sim.basis, "Basis file")->required();
  sim_cmd->add_option("--noise", sim.noise, "none, gaussian or poisson")
      ->check(CLI::IsMember({"none", "gaussian", "poisson"}));
  sim_cmd->add_option("--sigma", sim.sigma, "Gaussian noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--poisson-scale", sim.poisson_scale, "Poisson counts per unit intensity")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Noise seed");
  sim_cmd->add_option("--out-exposure", sim.out_exposure, "Output .ctge file")->required();
  sim_cmd->add_option("--out-blur", sim.out_blur, "Optional direct-capture PGM");

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Recover the sub-frames of an exposure");
  rec_cmd->add_option("--exposure", rec.exposure, "Exposure .ctge file")->required();
  rec_cmd->add_option("--basis", rec.basis, "Basis .ctgb file")->required();
  rec_cmd->add_option("--mode", rec.mode, "correlation, exact, cs or sliding")
      ->check(CLI::IsMember({"correlation", "exact", "cs", "sliding"}));
  rec_cmd->add_option("--dc", rec.dc, "formula or zero")->check(CLI::IsMember({"formula", "zero"}));
  rec_cmd->add_option("--lambda", rec.lambda, "Fixed TV weight for every problem")
      ->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--lambda-rel", rec.lambda_rel,
                      "Relative TV weight used when --lambda is absent")
      ->check(CLI::NonNegativeNumber);
  rec_cmd->add_option("--tv", rec.tv, "temporal or spatial")
      ->check(CLI::IsMember({"temporal", "spatial"}));
  rec_cmd->add_option("--tau", rec.tau, "Threshold as a fraction of each frame's max")
      ->check(CLI::Range(0.0, 1.0));
  rec_cmd->add_option("--max-iters", rec.max_iters, "CS solver iteration cap")
      ->check(CLI::PositiveNumber);
  rec_cmd->add_option("--rel-tol", rec.rel_tol, "CS solver relative tolerance")
      ->check(CLI::PositiveNumber);
  rec_cmd->add_option("--out", rec.out, "Output directory")->required();
  rec_cmd->add_option("--truth", rec.truth, "Ground-truth frame directory");
  rec_cmd->add_flag("--timings", rec.timings, "Include stage timings in metrics.txt");

  std::string recon_dir, truth_dir, metrics_out;
  auto* met_cmd = app.add_subcommand("metrics", "Compare two frame sequences");
  met_cmd->add_option("--recon", recon_dir, "Reconstruction directory")->required();
  met_cmd->add_option("--truth", truth_dir, "Ground-truth directory")->required();
  met_cmd->add_option("--out", metrics_out, "Write key=value report here");

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "Run a bundled end-to-end simulation");
  demo_cmd->add_option("--paper-sim", demo.sim, "1: Hadamard, 2: compressive sweep, 3: sliding")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  demo_cmd->add_option("--scale", demo.scale, "Scene scale (1 = 128x128, 8x8 super-pixels)");
  demo_cmd->add_option("--seed", demo.seed, "Scene and basis seed");
  demo_cmd->add_option("--tau", demo.tau, "Sliding demo threshold")->check(CLI::Range(0.0, 1.0));
  demo_cmd->add_option("--max-iters", demo.max_iters, "CS solver iteration cap")
      ->check(CLI::PositiveNumber);
  demo_cmd->add_option("--out", demo.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const ctgi::Parallelism par{threads};
  try {
    if (gen_cmd->parsed()) return run_gen_basis(gen);
    if (sim_cmd->parsed()) return run_simulate(sim, par);
    if (rec_cmd->parsed()) return run_reconstruct(rec, par);
    if (met_cmd->parsed()) return run_metrics(recon_dir, truth_dir, metrics_out);
    if (demo_cmd->parsed()) return run_demo(demo, par);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
