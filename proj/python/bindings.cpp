#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "depthpatch/baselines.hpp"
#include "depthpatch/defenses.hpp"
#include "depthpatch/errors.hpp"
#include "depthpatch/experiment.hpp"
#include "depthpatch/losses.hpp"
#include "depthpatch/metrics.hpp"
#include "depthpatch/persistence.hpp"
#include "depthpatch/projection.hpp"
#include "depthpatch/synthetic.hpp"

namespace py = pybind11;
namespace dp = depthpatch;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

dp::Image to_image(const Array& a) {
  if (a.ndim() != 3) throw dp::DimensionMismatch("expected an H x W x C array");
  dp::Image image(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                  static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), image.values().begin());
  return image;
}

Array from_image(const dp::Image& image) {
  Array out({image.height(), image.width(), image.channels()});
  std::copy(image.values().begin(), image.values().end(), out.mutable_data());
  return out;
}

dp::DepthMap to_depth(const Array& a) {
  if (a.ndim() != 2) throw dp::DimensionMismatch("expected an H x W array");
  dp::DepthMap depth(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), depth.values().begin());
  return depth;
}

Array from_depth(const dp::DepthMap& depth) {
  Array out({depth.height(), depth.width()});
  std::copy(depth.values().begin(), depth.values().end(), out.mutable_data());
  return out;
}

dp::PatchMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw dp::DimensionMismatch("expected an H x W boolean mask");
  dp::PatchMask mask(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  const bool* p = a.data();
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c) mask.set(r, c, p[r * mask.width() + c]);
  mask.refresh_bounding_box();
  return mask;
}

py::object report_to_python(const dp::AttackReport& report) {
  return py::module_::import("json").attr("loads")(report.to_json().dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adversarial patch toolkit for monocular depth estimation";

  py::register_exception<dp::Error>(m, "Error", PyExc_RuntimeError);

  py::class_<dp::DepthModel, std::shared_ptr<dp::DepthModel>>(m, "DepthModel")
      .def_property_readonly("name", &dp::DepthModel::name)
      .def_property_readonly("units", &dp::DepthModel::units)
      .def_property_readonly("input_size",
                             [](const dp::DepthModel& model) {
                               return py::make_tuple(model.input_size().height,
                                                     model.input_size().width);
                             })
      .def("weights_hash", &dp::DepthModel::weights_hash)
      .def("predict", [](const dp::DepthModel& model, const Array& image) {
        return from_depth(model.predict(to_image(image)));
      });

  m.def("make_model", [](const std::string& name) {
    return std::shared_ptr<dp::DepthModel>(dp::make_model(name));
  });
  m.def("available_models", &dp::available_models);

  m.def("depth_error", [](const Array& clean, const Array& adv, const py::array_t<bool>& mask) {
    return dp::depth_error(to_depth(clean), to_depth(adv), to_mask(mask));
  });
  m.def(
      "affected_ratio",
      [](const Array& clean, const Array& adv, const py::array_t<bool>& mask, double threshold) {
        return dp::affected_ratio(to_depth(clean), to_depth(adv), to_mask(mask), threshold);
      },
      py::arg("clean"), py::arg("adversarial"), py::arg("mask"),
      py::arg("threshold") = dp::kAffectedThreshold);
  m.def("ssim", [](const Array& a, const Array& b) { return dp::ssim(to_image(a), to_image(b)); });
  m.def("tv_loss", [](const Array& p) { return dp::tv_loss(to_image(p)); });
  m.def("tv_loss_gradient", [](const Array& p) { return from_image(dp::tv_loss_gradient(to_image(p))); });
  m.def("project", [](const Array& delta, double eps) {
    return from_image(dp::project(to_image(delta), eps));
  });

  m.def("jpeg_compress", [](const Array& image, int quality) {
    return from_image(dp::jpeg_compress(to_image(image), quality));
  });
  m.def("median_blur", [](const Array& image, int kernel) {
    return from_image(dp::median_blur(to_image(image), kernel));
  });
  m.def("gaussian_noise", [](const Array& image, double sigma, std::uint64_t seed) {
    return from_image(dp::gaussian_noise(to_image(image), sigma, seed));
  });

  m.def("synthetic_scenes", [](int count, int height, int width, std::uint64_t seed) {
    py::list out;
    for (const dp::Scene& scene : dp::synthetic_scenes(count, {height, width}, seed)) {
      out.append(py::make_tuple(scene.identifier, from_image(scene.image),
                                from_depth(*scene.reference_depth)));
    }
    return out;
  });

  m.def("parse_config", [](const std::string& text) { return dp::parse_config(text).to_text(); },
        "Validate and normalise a key = value config; returns the canonical text.");

  m.def(
      "run_attack",
      [](const std::string& config_text) {
        const dp::AttackRun run = dp::run_attack(dp::parse_config(config_text));
        return report_to_python(run.report);
      },
      "Optimise a patch from a key = value config and return the report as a dict.");
  m.def("run_eval", [](const std::filesystem::path& patch_png, const std::filesystem::path& sidecar,
                       const std::string& config_text) {
    return report_to_python(dp::run_eval(patch_png, sidecar, dp::parse_config(config_text)));
  });
  m.def("load_patch", [](const std::filesystem::path& patch_png, const std::filesystem::path& sidecar) {
    const dp::LoadedPatch loaded = dp::load_patch(patch_png, sidecar);
    return py::make_tuple(from_image(loaded.patch.natural_base),
                          from_image(loaded.patch.perturbation), loaded.patch.epsilon);
  });
}
