#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "depthpatch/image.hpp"

namespace depthpatch {

/// A scalar objective on a depth map with its gradient.
struct LossValue {
  double value = 0.0;
  DepthMap gradient;  // dL/d depth, same size as the depth map
};
using ScalarLoss = std::function<LossValue(const DepthMap&)>;

/// Victim-model contract. Weights are frozen; nothing in this toolkit
/// writes to them.
class DepthModel {
 public:
  virtual ~DepthModel() = default;

  virtual std::string name() const = 0;
  virtual Size input_size() const = 0;
  virtual bool supports_input_gradients() const = 0;
  /// Environment variable naming the weights root for this adapter, or "".
  virtual std::string weights_env_var() const { return ""; }
  virtual std::string units() const { return "relative"; }

  /// Depth for an image of input_size() in [0,1]. ShapeError on a size
  /// mismatch, NonFiniteOutput if the network produces NaN/inf.
  DepthMap predict(const Image& image) const;

  /// dL/d image for L = loss(predict(image)). GradientUnavailable when the
  /// adapter cannot differentiate.
  Image input_gradient(const Image& image, const ScalarLoss& loss) const;

  /// Same, also returning the prediction and loss value (one forward pass).
  Image input_gradient(const Image& image, const ScalarLoss& loss, DepthMap* prediction,
                       double* loss_value) const;

  /// Hash of all parameters; identical before and after any attack.
  virtual std::uint64_t weights_hash() const = 0;

 protected:
  virtual DepthMap forward(const Image& image) const = 0;
  /// Runs the forward pass, asks `upstream` for dL/d depth given the
  /// prediction, and returns dL/d image.
  using Upstream = std::function<DepthMap(const DepthMap&)>;
  virtual Image backward(const Image& image, const Upstream& upstream) const = 0;

 private:
  void check_input(const Image& image) const;
};

/// Adapter discovery by name. Built-ins: "toy", "toy-warm".
/// Throws AdapterNotFound naming the adapter otherwise.
std::unique_ptr<DepthModel> make_model(const std::string& name);
std::vector<std::string> available_models();

using ModelFactory = std::function<std::unique_ptr<DepthModel>()>;
/// Register an external adapter (e.g. a wrapper around a published model).
void register_model(const std::string& name, ModelFactory factory);

}  // namespace depthpatch
