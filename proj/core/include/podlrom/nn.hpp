#pragma once

// Small reverse-mode neural network engine in double precision. Tensors are
// batch x height x width x channels, row-major in that axis order, so every
// sample is a contiguous block with the channel index fastest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace podlrom::nn {

struct Shape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;

  std::size_t size() const { return height * width * channels; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor4 {
public:
  Tensor4() = default;
  Tensor4(std::size_t batch, Shape shape);

  std::size_t batch() const { return batch_; }
  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator()(std::size_t b, std::size_t h, std::size_t w, std::size_t c) {
    return data_[((b * shape_.height + h) * shape_.width + w) * shape_.channels + c];
  }
  double operator()(std::size_t b, std::size_t h, std::size_t w, std::size_t c) const {
    return data_[((b * shape_.height + h) * shape_.width + w) * shape_.channels + c];
  }

  // Column b of the returned (sample size x batch) view is sample b.
  Eigen::Map<Eigen::MatrixXd> matrix();
  Eigen::Map<const Eigen::MatrixXd> matrix() const;

  // Same data, different per-sample shape of equal size.
  void reshape(Shape shape);

private:
  std::size_t batch_ = 0;
  Shape shape_{};
  std::vector<double> data_;
};

enum class LayerKind { dense, conv, conv_transpose, reshape, activation };
enum class Activation { elu, linear };

std::string to_string(LayerKind kind);
std::string to_string(Activation act);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;    // dense
  std::size_t filters = 0;  // conv / conv_transpose output channels
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t output_padding = 0;  // conv_transpose only
  Activation activation = Activation::linear;
  Shape target{};  // reshape

  static LayerSpec dense(std::size_t units);
  // Output size floor((H + 2p - k) / s) + 1.
  static LayerSpec conv(std::size_t filters, std::size_t kernel, std::size_t stride, std::size_t padding);
  // Output size (H - 1) s + k - 2p + output_padding; the adjoint of conv.
  static LayerSpec conv_transpose(std::size_t filters, std::size_t kernel, std::size_t stride,
                                  std::size_t padding, std::size_t output_padding);
  static LayerSpec reshape(Shape target);
  static LayerSpec act(Activation activation);

  bool operator==(const LayerSpec&) const = default;
};

struct ParamSlice {
  std::size_t offset = 0;
  std::size_t weights = 0;
  std::size_t biases = 0;

  std::size_t size() const { return weights + biases; }
};

// A validated layer stack. Construction computes every intermediate shape
// and throws InvalidArgument naming the first layer that does not compose.
class Network {
public:
  Network() = default;
  Network(Shape input, std::vector<LayerSpec> layers);

  const Shape& input_shape() const { return input_; }
  const Shape& output_shape() const { return shapes_.empty() ? input_ : shapes_.back(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  // Output shape of layer i.
  const Shape& layer_output(std::size_t i) const { return shapes_.at(i); }
  const Shape& layer_input(std::size_t i) const { return i == 0 ? input_ : shapes_.at(i - 1); }
  const std::vector<ParamSlice>& registry() const { return registry_; }
  std::size_t parameter_count() const { return parameter_count_; }

  bool operator==(const Network& other) const {
    return input_ == other.input_ && layers_ == other.layers_;
  }

private:
  Shape input_{};
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<ParamSlice> registry_;
  std::size_t parameter_count_ = 0;
};

// Flat weights-and-biases vector plus the layer -> slice registry. Weights of
// a layer are stored column-major: dense (out x in), conv
// (filters x k*k*in_channels), conv_transpose (in_channels x k*k*filters).
struct ParamSet {
  std::vector<double> values;
  std::vector<ParamSlice> registry;

  std::size_t size() const { return values.size(); }
};

// Fan-in scaled uniform weights with variance 1 / fan_in; zero biases.
ParamSet init_params(const Network& network, std::uint64_t seed);

struct ForwardCache {
  const Network* network = nullptr;
  std::vector<Tensor4> inputs;  // input of every layer
  Tensor4 output;
};

Tensor4 forward(const Network& network, std::span<const double> params, const Tensor4& input,
                ForwardCache* cache = nullptr);

struct Gradients {
  Tensor4 input;
  std::vector<double> params;
};

// Throws InvalidArgument when the cache does not belong to `network` or the
// upstream gradient does not match the cached output.
Gradients backward(const Network& network, std::span<const double> params, const ForwardCache& cache,
                   const Tensor4& upstream);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamHyper&) const = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  AdamHyper hyper;

  static AdamState zeros(std::size_t size, AdamHyper hyper);
  bool operator==(const AdamState&) const = default;
};

// One bias-corrected Adam update. Throws NumericalError naming the step if
// the gradient contains NaN or Inf.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace podlrom::nn
