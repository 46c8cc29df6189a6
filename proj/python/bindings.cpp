// Python bindings: thin wrappers that convert between NumPy arrays and the
// library's Image/Video types. Frame stacks are (K, rows, cols) float64.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

#include "ctgi/basis.hpp"
#include "ctgi/compressive.hpp"
#include "ctgi/correlation.hpp"
#include "ctgi/error.hpp"
#include "ctgi/io.hpp"
#include "ctgi/metrics.hpp"
#include "ctgi/scene.hpp"

namespace py = pybind11;
using namespace ctgi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Image(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array from_image(const Image& img) {
  Array out({img.rows(), img.cols()});
  std::copy(img.values().begin(), img.values().end(), out.mutable_data());
  return out;
}

Video to_video(const Array& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected a (K, rows, cols) array");
  const auto k = static_cast<std::size_t>(a.shape(0));
  const auto rows = static_cast<std::size_t>(a.shape(1));
  const auto cols = static_cast<std::size_t>(a.shape(2));
  std::vector<Image> frames;
  frames.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    const double* p = a.data() + f * rows * cols;
    frames.emplace_back(rows, cols, std::vector<double>(p, p + rows * cols));
  }
  return Video(std::move(frames));
}

Array from_video(const Video& v) {
  Array out({v.frame_count(), v.rows(), v.cols()});
  double* dst = out.mutable_data();
  for (const Image& f : v.frames()) dst = std::copy(f.values().begin(), f.values().end(), dst);
  return out;
}

ExposureImage to_exposure(const Array& s, const ModulationBasis& basis) {
  return ExposureImage{to_image(s), basis.geometry(), std::nullopt};
}

DcPolicy parse_dc(const std::string& s) {
  if (s == "formula") return DcPolicy::formula;
  if (s == "zero") return DcPolicy::zero;
  throw std::invalid_argument("dc must be 'formula' or 'zero'");
}

TvMode parse_tv(const std::string& s) {
  if (s == "temporal") return TvMode::temporal;
  if (s == "spatial") return TvMode::spatial;
  throw std::invalid_argument("tv must be 'temporal' or 'spatial'");
}

HadamardOrdering parse_ordering(const std::string& s) {
  if (s == "walsh" || s == "sequency") return HadamardOrdering::sequency;
  if (s == "natural") return HadamardOrdering::natural;
  throw std::invalid_argument("ordering must be 'walsh' or 'natural'");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::no_descent: return "no_descent";
  }
  return "unknown";
}

SolverOptions make_options(std::size_t max_iters, double rel_tol, double step_scale,
                           std::size_t prox_iters) {
  SolverOptions o;
  o.max_iters = max_iters;
  o.rel_tol = rel_tol;
  o.step_scale = step_scale;
  o.prox_iters = prox_iters;
  return o;
}

py::dict metrics_dict(const MetricsReport& r) {
  py::list frames;
  for (const FrameMetrics& f : r.frames) {
    py::dict d;
    d["psnr"] = f.psnr;
    d["rmse"] = f.rmse;
    d["pearson"] = f.pearson;
    frames.append(d);
  }
  py::dict out;
  out["mean_psnr"] = r.mean_psnr;
  out["mean_rmse"] = r.mean_rmse;
  out["mean_pearson"] = r.mean_pearson;
  out["frames"] = frames;
  return out;
}

}  // namespace

PYBIND11_MODULE(_ctgi, m) {
  m.doc() = "Temporal ghost imaging: modulation, single-exposure simulation and reconstruction";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DegeneratePatternError>(m, "DegeneratePatternError", error.ptr());
  py::register_exception<RankDeficientError>(m, "RankDeficientError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<SolverError>(m, "SolverError", error.ptr());

  py::class_<SuperPixelGeometry>(m, "Geometry")
      .def(py::init<std::size_t, std::size_t, std::size_t>(), py::arg("m"), py::arg("l"), py::arg("n"))
      .def_property_readonly("m", &SuperPixelGeometry::m)
      .def_property_readonly("l", &SuperPixelGeometry::l)
      .def_property_readonly("n", &SuperPixelGeometry::n)
      .def("__eq__", [](const SuperPixelGeometry& a, const SuperPixelGeometry& b) { return a == b; })
      .def("__repr__", [](const SuperPixelGeometry& g) {
        return "Geometry(m=" + std::to_string(g.m()) + ", l=" + std::to_string(g.l()) +
               ", n=" + std::to_string(g.n()) + ")";
      });

  py::class_<ModulationBasis>(m, "Basis")
      .def_property_readonly("kind", [](const ModulationBasis& b) {
        return b.kind() == BasisKind::walsh_hadamard ? "hadamard" : "random";
      })
      .def_property_readonly("ordering", [](const ModulationBasis& b) {
        return b.ordering() == HadamardOrdering::sequency ? "walsh" : "natural";
      })
      .def_property_readonly("geometry", &ModulationBasis::geometry)
      .def_property_readonly("frames", &ModulationBasis::frame_count)
      .def_property_readonly("seed", &ModulationBasis::seed)
      .def("tiles", [](const ModulationBasis& b) {
        const std::size_t l = b.geometry().l();
        py::array_t<std::uint8_t> out({b.frame_count(), l, l});
        std::uint8_t* dst = out.mutable_data();
        for (const Tile& t : b.tiles()) dst = std::copy(t.begin(), t.end(), dst);
        return out;
      }, "The K binary l x l tiles as a (K, l, l) uint8 array.")
      .def("pattern", [](const ModulationBasis& b, std::size_t k) { return from_image(b.pattern(k)); },
           py::arg("k"), "Full m x m modulator pattern of frame k (0-based).")
      .def("to_bytes", [](const ModulationBasis& b) {
        const auto bytes = serialize_basis(b);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      })
      .def_static("from_bytes", [](const py::bytes& data) {
        const std::string s = data;
        return deserialize_basis({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
      })
      .def("__eq__", [](const ModulationBasis& a, const ModulationBasis& b) { return a == b; });

  m.def("hadamard_basis",
        [](const SuperPixelGeometry& g, const std::string& ordering, std::optional<std::size_t> frames) {
          return build_hadamard_basis(g, parse_ordering(ordering), frames);
        },
        py::arg("geometry"), py::arg("ordering") = "walsh", py::arg("frames") = py::none());
  m.def("random_basis", &build_random_basis, py::arg("geometry"), py::arg("frames"),
        py::arg("seed"), py::arg("density") = 0.5);

  m.def("upsample_scene",
        [](const Array& video, const SuperPixelGeometry& g) {
          return from_video(upsample_scene(to_video(video), g));
        },
        py::arg("video"), py::arg("geometry"));
  m.def("simulate",
        [](const Array& video, const ModulationBasis& basis, const std::string& noise, double sigma,
           double poisson_scale, std::uint64_t seed, unsigned threads) {
          ExposureImage s = modulate_accumulate(to_video(video), basis, Parallelism{threads});
          NoiseModel model;
          if (noise == "gaussian") {
            model = NoiseModel::gaussian(sigma, seed);
          } else if (noise == "poisson") {
            model = NoiseModel::poisson(poisson_scale, seed);
          } else if (noise != "none") {
            throw std::invalid_argument("noise must be 'none', 'gaussian' or 'poisson'");
          }
          if (model.kind != NoiseModel::Kind::none) s = add_noise(s, model);
          return from_image(s.values);
        },
        py::arg("video"), py::arg("basis"), py::arg("noise") = "none", py::arg("sigma") = 0.0,
        py::arg("poisson_scale") = 1.0, py::arg("seed") = 0, py::arg("threads") = 0,
        "Modulate an m x m frame stack and accumulate one exposure.");
  m.def("direct_capture", [](const Array& video) { return from_image(direct_capture(to_video(video))); },
        py::arg("video"));

  m.def("reconstruct_correlation",
        [](const Array& s, const ModulationBasis& basis, const std::string& dc, unsigned threads) {
          return from_video(reconstruct_correlation(to_exposure(s, basis), basis, parse_dc(dc),
                                                    Parallelism{threads}).video);
        },
        py::arg("exposure"), py::arg("basis"), py::arg("dc") = "formula", py::arg("threads") = 0);
  m.def("reconstruct_exact",
        [](const Array& s, const ModulationBasis& basis, unsigned threads) {
          const ReconstructionResult r = reconstruct_exact(to_exposure(s, basis), basis, Parallelism{threads});
          return py::make_tuple(from_video(r.video), r.residual_norm);
        },
        py::arg("exposure"), py::arg("basis"), py::arg("threads") = 0,
        "Returns (frames, largest per-block residual norm).");
  m.def("reconstruct_sliding",
        [](const Array& s, const ModulationBasis& basis, const std::string& dc, unsigned threads) {
          return from_video(reconstruct_sliding(to_exposure(s, basis), basis, parse_dc(dc),
                                                Parallelism{threads}).video);
        },
        py::arg("exposure"), py::arg("basis"), py::arg("dc") = "formula", py::arg("threads") = 0);
  m.def("apply_threshold",
        [](const Array& video, double tau) {
          ReconstructionResult r;
          r.video = to_video(video);
          return from_video(apply_threshold(std::move(r), tau).video);
        },
        py::arg("video"), py::arg("tau"));
  m.def("reconstruct_cs",
        [](const Array& s, const ModulationBasis& basis, std::optional<double> lam, double lambda_rel,
           const std::string& tv, std::size_t max_iters, double rel_tol, unsigned threads) {
          const Regularization reg{lam, lambda_rel};
          return from_video(reconstruct_cs(to_exposure(s, basis), basis, reg, parse_tv(tv),
                                           make_options(max_iters, rel_tol, 1.0, 60),
                                           Parallelism{threads}).video);
        },
        py::arg("exposure"), py::arg("basis"), py::arg("lam") = py::none(), py::arg("lambda_rel") = 0.01,
        py::arg("tv") = "temporal", py::arg("max_iters") = 2000, py::arg("rel_tol") = 1e-8,
        py::arg("threads") = 0);

  m.def("solve_tv",
        [](const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y, double lam, const std::string& tv,
           std::size_t grid_side, std::size_t max_iters, double rel_tol, double step_scale,
           std::size_t prox_iters) {
          CsProblem p;
          p.phi = phi;
          p.y = y;
          p.lambda = lam;
          p.mode = parse_tv(tv);
          p.grid_side = grid_side;
          const CsSolution sol = solve_tv(p, make_options(max_iters, rel_tol, step_scale, prox_iters));
          py::dict out;
          out["x"] = sol.x;
          out["objective"] = sol.objective;
          out["iterations"] = sol.iterations;
          out["reason"] = termination_name(sol.reason);
          return out;
        },
        py::arg("phi"), py::arg("y"), py::arg("lam"), py::arg("tv") = "temporal", py::arg("grid_side") = 1,
        py::arg("max_iters") = 2000, py::arg("rel_tol") = 1e-8, py::arg("step_scale") = 1.0,
        py::arg("prox_iters") = 60,
        "Minimize 1/2 ||y - phi x||^2 + lam TV(x). y is (l^2,) or (l^2, P).");
  m.def("tv_objective",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y, double lam,
           const std::string& tv, std::size_t grid_side) {
          CsProblem p;
          p.phi = phi;
          p.y = y;
          p.lambda = lam;
          p.mode = parse_tv(tv);
          p.grid_side = grid_side;
          p.validate();
          return tv_objective(x, p);
        },
        py::arg("x"), py::arg("phi"), py::arg("y"), py::arg("lam"), py::arg("tv") = "temporal",
        py::arg("grid_side") = 1);

  m.def("plan_sampling",
        [](std::size_t frames, std::size_t side) {
          const SamplingPlan p = plan_sampling(frames, side);
          py::dict d;
          d["frames"] = p.frames;
          d["side"] = p.side;
          d["measurements"] = p.measurements;
          d["sampling_rate"] = p.sampling_rate;
          d["transfer_efficiency"] = p.transfer_efficiency;
          return d;
        },
        py::arg("frames"), py::arg("side"));

  m.def("compute_metrics",
        [](const Array& recon, const Array& truth) {
          return metrics_dict(compute_metrics(to_video(recon), to_video(truth)));
        },
        py::arg("recon"), py::arg("truth"));

  m.def("read_exposure", [](const std::filesystem::path& p) { return from_image(io::read_exposure(p)); });
  m.def("write_exposure",
        [](const std::filesystem::path& p, const Array& s) { io::write_exposure(p, to_image(s)); });
  m.def("read_basis", &io::read_basis);
  m.def("write_basis", &io::write_basis);
  m.def("read_frames", [](const std::filesystem::path& dir) { return from_video(io::read_frame_sequence(dir)); });
  m.def("write_frames",
        [](const std::filesystem::path& dir, const Array& video, int bits, bool sidecar) {
          io::write_frame_sequence(dir, to_video(video), bits, sidecar);
        },
        py::arg("dir"), py::arg("video"), py::arg("bits") = 16, py::arg("sidecar") = true);
}
