#include "depthpatch/depth_model.hpp"

#include <map>
#include <mutex>

#include "depthpatch/errors.hpp"
#include "depthpatch/toy_depth_net.hpp"

namespace depthpatch {

void DepthModel::check_input(const Image& image) const {
  const Size want = input_size();
  if (image.size() != want || image.channels() != 3) {
    throw ShapeError(name() + " expects a " + std::to_string(want.height) + "x" +
                     std::to_string(want.width) + "x3 image, got " +
                     std::to_string(image.height()) + "x" + std::to_string(image.width()) + "x" +
                     std::to_string(image.channels()));
  }
}

DepthMap DepthModel::predict(const Image& image) const {
  check_input(image);
  DepthMap depth = forward(image);
  if (!depth.all_finite()) throw NonFiniteOutput(name() + " produced a non-finite depth value");
  depth.set_units(units());
  return depth;
}

Image DepthModel::input_gradient(const Image& image, const ScalarLoss& loss) const {
  return input_gradient(image, loss, nullptr, nullptr);
}

Image DepthModel::input_gradient(const Image& image, const ScalarLoss& loss, DepthMap* prediction,
                                 double* loss_value) const {
  if (!supports_input_gradients()) {
    throw GradientUnavailable(name() + " cannot differentiate with respect to its input");
  }
  check_input(image);
  return backward(image, [&](const DepthMap& raw) {
    if (!raw.all_finite()) throw NonFiniteOutput(name() + " produced a non-finite depth value");
    DepthMap depth = raw;
    depth.set_units(units());
    LossValue lv = loss(depth);
    if (lv.gradient.size() != depth.size()) {
      throw DimensionMismatch("loss gradient does not match the depth map");
    }
    if (prediction) *prediction = std::move(depth);
    if (loss_value) *loss_value = lv.value;
    return std::move(lv.gradient);
  });
}

namespace {

std::map<std::string, ModelFactory>& registry() {
  static std::map<std::string, ModelFactory> models = [] {
    std::map<std::string, ModelFactory> m;
    m["toy"] = [] { return std::make_unique<ToyDepthNet>(); };
    m["toy-warm"] = [] {
      auto net = std::make_unique<ToyDepthNet>();
      net->warm_up();
      net->set_name("toy-warm");
      return net;
    };
    return m;
  }();
  return models;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::unique_ptr<DepthModel> make_model(const std::string& name) {
  ModelFactory factory;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) {
      std::string known;
      for (const auto& [key, _] : registry()) known += (known.empty() ? "" : ", ") + key;
      throw AdapterNotFound("no depth-model adapter named '" + name + "' (available: " + known + ")");
    }
    factory = it->second;
  }
  return factory();
}

std::vector<std::string> available_models() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [key, _] : registry()) names.push_back(key);
  return names;
}

void register_model(const std::string& name, ModelFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

}  // namespace depthpatch
