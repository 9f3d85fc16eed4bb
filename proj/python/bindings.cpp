#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flowfill/config.hpp"
#include "flowfill/errors.hpp"
#include "flowfill/eval.hpp"
#include "flowfill/flow_completion.hpp"
#include "flowfill/io.hpp"
#include "flowfill/pipeline.hpp"

namespace py = pybind11;
using namespace flowfill;

namespace {

Frame frame_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3)
    throw DataError("expected an array of shape (height, width, 3)");
  Frame f(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::copy(arr.data(), arr.data() + arr.size(), f.data.begin());
  return f;
}

py::array_t<float> frame_to_array(const Frame& f) {
  py::array_t<float> arr({f.height, f.width, 3});
  std::copy(f.data.begin(), f.data.end(), arr.mutable_data());
  return arr;
}

MaskFrame mask_from_array(py::array_t<uint8_t, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw DataError("expected a mask of shape (height, width)");
  MaskFrame m(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  const uint8_t* src = arr.data();
  for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = src[i] != 0;
  return m;
}

py::array_t<uint8_t> mask_to_array(const MaskFrame& m) {
  py::array_t<uint8_t> arr({m.height, m.width});
  std::copy(m.data.begin(), m.data.end(), arr.mutable_data());
  return arr;
}

FlowField flow_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 2)
    throw DataError("expected a flow array of shape (height, width, 2)");
  FlowField f(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  std::copy(arr.data(), arr.data() + arr.size(), f.data.begin());
  return f;
}

py::array_t<float> flow_to_array(const FlowField& f) {
  py::array_t<float> arr({f.height, f.width, 2});
  std::copy(f.data.begin(), f.data.end(), arr.mutable_data());
  return arr;
}

EdgeMap edges_from_array(py::array_t<uint8_t, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw DataError("expected an edge map of shape (height, width)");
  EdgeMap e(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
  const uint8_t* src = arr.data();
  for (size_t i = 0; i < e.data.size(); ++i) e.data[i] = src[i] != 0;
  return e;
}

py::array_t<uint8_t> edges_to_array(const EdgeMap& e) {
  py::array_t<uint8_t> arr({e.height, e.width});
  std::copy(e.data.begin(), e.data.end(), arr.mutable_data());
  return arr;
}

PipelineConfig make_config(double tau, double temperature, const std::string& domain,
                           const std::string& edge_strategy, bool use_nonlocal, int dilation_radius,
                           int max_iterations, int threads) {
  PipelineConfig cfg;
  cfg.chain.tau = tau;
  cfg.fusion.temperature = temperature;
  cfg.fusion.domain = parse_domain(domain);
  cfg.edge_strategy = parse_edge_strategy(edge_strategy);
  cfg.use_nonlocal = use_nonlocal;
  cfg.dilation_radius = dilation_radius;
  cfg.max_pipeline_iterations = max_iterations;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "flow-based video completion";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<DegenerateAlignment>(m, "DegenerateAlignment", PyExc_RuntimeError);

  m.def(
      "complete",
      [](const std::vector<py::array_t<float, py::array::c_style | py::array::forcecast>>& frames,
         const std::vector<py::array_t<uint8_t, py::array::c_style | py::array::forcecast>>& masks,
         double tau, double temperature, const std::string& domain,
         const std::string& edge_strategy, bool use_nonlocal, int dilation_radius,
         int max_iterations, int threads) {
        std::vector<Frame> fs;
        std::vector<MaskFrame> ms;
        for (const auto& a : frames) fs.push_back(frame_from_array(a));
        for (const auto& a : masks) ms.push_back(mask_from_array(a));
        PipelineConfig cfg = make_config(tau, temperature, domain, edge_strategy, use_nonlocal,
                                         dilation_radius, max_iterations, threads);
        PipelineResult result = run(fs, ms, cfg);
        py::list out;
        for (const Frame& f : result.frames) out.append(frame_to_array(f));
        py::dict stats;
        stats["iterations"] = result.iterations;
        stats["propagated_clean"] = result.propagated_clean;
        stats["propagated_tainted"] = result.propagated_tainted;
        stats["fallback_filled"] = result.fallback_filled;
        return py::make_tuple(out, stats);
      },
      py::arg("frames"), py::arg("masks"), py::arg("tau") = 5.0, py::arg("temperature") = 0.1,
      py::arg("domain") = "gradient", py::arg("edge_strategy") = "link",
      py::arg("use_nonlocal") = true, py::arg("dilation_radius") = 15,
      py::arg("max_iterations") = 20, py::arg("threads") = 1,
      "Run the full completion pipeline over a frame/mask sequence.");

  m.def(
      "complete_flow",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> flow,
         py::array_t<uint8_t, py::array::c_style | py::array::forcecast> mask,
         py::object edges) {
        FlowField f = flow_from_array(flow);
        MaskFrame m_ = mask_from_array(mask);
        FlowCompletionProblem problem;
        problem.flow = &f;
        problem.mask_dilated = &m_;
        EdgeMap e;
        if (!edges.is_none()) {
          e = edges_from_array(edges.cast<py::array_t<uint8_t, py::array::c_style | py::array::forcecast>>());
          problem.edges = &e;
        }
        return flow_to_array(complete_flow(problem));
      },
      py::arg("flow"), py::arg("mask"), py::arg("edges") = py::none(),
      "Fill masked flow with a piecewise-smooth field; edges block smoothing.");

  m.def(
      "estimate_flow",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> a,
         py::array_t<float, py::array::c_style | py::array::forcecast> b) {
        PyramidalLKEstimator lk;
        return flow_to_array(lk.estimate(frame_from_array(a), frame_from_array(b), 0, 1));
      },
      py::arg("frame_a"), py::arg("frame_b"), "Dense flow from frame_a to frame_b.");

  m.def(
      "canny",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> image, double sigma,
         double low, double high) {
        if (image.ndim() != 2) throw DataError("expected a scalar image of shape (height, width)");
        ScalarImage img(static_cast<int>(image.shape(1)), static_cast<int>(image.shape(0)));
        std::copy(image.data(), image.data() + image.size(), img.data.begin());
        return edges_to_array(canny(img, sigma, low, high));
      },
      py::arg("image"), py::arg("sigma") = 1.0, py::arg("low") = 0.1, py::arg("high") = 0.2);

  m.def(
      "synth_scene",
      [](const std::string& name, int width, int height, int frames, unsigned seed) {
        SyntheticScene scene = synth_scene(name, width, height, frames, seed);
        py::dict out;
        py::list fs, ms, gt;
        for (const Frame& f : scene.frames) fs.append(frame_to_array(f));
        for (const MaskFrame& m_ : scene.masks) ms.append(mask_to_array(m_));
        for (const Frame& f : scene.ground_truth_frames) gt.append(frame_to_array(f));
        out["frames"] = fs;
        out["masks"] = ms;
        out["ground_truth_frames"] = gt;
        py::dict flows;
        for (const auto& [key, flow] : scene.ground_truth_flows)
          flows[py::make_tuple(key.first, key.second)] = flow_to_array(flow);
        out["ground_truth_flows"] = flows;
        return out;
      },
      py::arg("name"), py::arg("width"), py::arg("height"), py::arg("frames"), py::arg("seed") = 1);

  m.def(
      "psnr",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> a,
         py::array_t<float, py::array::c_style | py::array::forcecast> b,
         py::object region) -> py::object {
        Frame fa = frame_from_array(a), fb = frame_from_array(b);
        MaskFrame r = region.is_none()
                          ? MaskFrame(fa.width, fa.height, true)
                          : mask_from_array(region.cast<py::array_t<uint8_t, py::array::c_style | py::array::forcecast>>());
        std::optional<double> v = psnr(fa, fb, r);
        if (!v) return py::float_(std::numeric_limits<double>::infinity());
        return py::float_(*v);
      },
      py::arg("a"), py::arg("b"), py::arg("region") = py::none());

  m.def(
      "ssim",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> a,
         py::array_t<float, py::array::c_style | py::array::forcecast> b) {
        return ssim(frame_from_array(a), frame_from_array(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "flow_epe",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> f,
         py::array_t<float, py::array::c_style | py::array::forcecast> g) {
        FlowField ff = flow_from_array(f), gg = flow_from_array(g);
        MaskFrame all(ff.width, ff.height, true);
        return flow_epe(ff, gg, all);
      },
      py::arg("f"), py::arg("g"));

  m.def("read_flo", [](const std::string& path) { return flow_to_array(read_flo(path)); },
        py::arg("path"));
  m.def(
      "write_flo",
      [](const std::string& path, py::array_t<float, py::array::c_style | py::array::forcecast> f) {
        write_flo(path, flow_from_array(f));
      },
      py::arg("path"), py::arg("flow"));
}
