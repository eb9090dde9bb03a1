#include <string>

#include "podlrom/error.hpp"
#include "podlrom/nn.hpp"

namespace podlrom::nn {

std::string Shape::str() const {
  return "(" + std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels) + ")";
}

Tensor4::Tensor4(std::size_t batch, Shape shape)
    : batch_(batch), shape_(shape), data_(batch * shape.size(), 0.0) {}

Eigen::Map<Eigen::MatrixXd> Tensor4::matrix() {
  return {data_.data(), static_cast<Eigen::Index>(shape_.size()), static_cast<Eigen::Index>(batch_)};
}

Eigen::Map<const Eigen::MatrixXd> Tensor4::matrix() const {
  return {data_.data(), static_cast<Eigen::Index>(shape_.size()), static_cast<Eigen::Index>(batch_)};
}

void Tensor4::reshape(Shape shape) {
  if (shape.size() != shape_.size()) {
    throw InvalidArgument("reshape " + shape_.str() + " -> " + shape.str() + " changes the size");
  }
  shape_ = shape;
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv: return "conv";
    case LayerKind::conv_transpose: return "conv_transpose";
    case LayerKind::reshape: return "reshape";
    case LayerKind::activation: return "activation";
  }
  return "unknown";
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::elu: return "elu";
    case Activation::linear: return "linear";
  }
  return "unknown";
}

LayerSpec LayerSpec::dense(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::conv(std::size_t filters, std::size_t kernel, std::size_t stride, std::size_t padding) {
  LayerSpec s;
  s.kind = LayerKind::conv;
  s.filters = filters;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::conv_transpose(std::size_t filters, std::size_t kernel, std::size_t stride,
                                    std::size_t padding, std::size_t output_padding) {
  LayerSpec s;
  s.kind = LayerKind::conv_transpose;
  s.filters = filters;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  s.output_padding = output_padding;
  return s;
}

LayerSpec LayerSpec::reshape(Shape target) {
  LayerSpec s;
  s.kind = LayerKind::reshape;
  s.target = target;
  return s;
}

LayerSpec LayerSpec::act(Activation activation) {
  LayerSpec s;
  s.kind = LayerKind::activation;
  s.activation = activation;
  return s;
}

}  // namespace podlrom::nn
