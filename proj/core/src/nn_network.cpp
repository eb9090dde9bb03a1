#include <cmath>
#include <string>
#include <utility>

#include "podlrom/error.hpp"
#include "podlrom/nn.hpp"
#include "podlrom/random.hpp"

namespace podlrom::nn {
namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// Geometry shared by conv and conv_transpose. "image" is the spatial grid the
// kernel slides over (conv input, conv_transpose output); "positions" is the
// grid of kernel placements (conv output, conv_transpose input).
struct Patch {
  std::size_t image_h, image_w, channels;
  std::size_t pos_h, pos_w;
  std::size_t kernel, stride, padding;

  std::size_t rows() const { return kernel * kernel * channels; }
};

// P(r, col) with r = (kh * k + kw) * C + c and col = (b * PH + ph) * PW + pw.
Eigen::MatrixXd im2col(std::span<const double> image, std::size_t batch, const Patch& g) {
  const std::size_t cols = batch * g.pos_h * g.pos_w;
  Eigen::MatrixXd p(static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(cols));
  double* out = p.data();
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* img = image.data() + b * g.image_h * g.image_w * g.channels;
    for (std::size_t ph = 0; ph < g.pos_h; ++ph) {
      for (std::size_t pw = 0; pw < g.pos_w; ++pw) {
        for (std::size_t kh = 0; kh < g.kernel; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(ph * g.stride + kh) - pad;
          for (std::size_t kw = 0; kw < g.kernel; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(pw * g.stride + kw) - pad;
            if (ih < 0 || iw < 0 || ih >= static_cast<std::ptrdiff_t>(g.image_h) ||
                iw >= static_cast<std::ptrdiff_t>(g.image_w)) {
              for (std::size_t c = 0; c < g.channels; ++c) *out++ = 0.0;
            } else {
              const double* src = img + (static_cast<std::size_t>(ih) * g.image_w +
                                         static_cast<std::size_t>(iw)) * g.channels;
              for (std::size_t c = 0; c < g.channels; ++c) *out++ = src[c];
            }
          }
        }
      }
    }
  }
  return p;
}

// Adjoint of im2col: scatter-add columns back onto the image.
void col2im(const Eigen::MatrixXd& p, std::span<double> image, std::size_t batch, const Patch& g) {
  const double* in = p.data();
  const auto pad = static_cast<std::ptrdiff_t>(g.padding);
  for (std::size_t b = 0; b < batch; ++b) {
    double* img = image.data() + b * g.image_h * g.image_w * g.channels;
    for (std::size_t ph = 0; ph < g.pos_h; ++ph) {
      for (std::size_t pw = 0; pw < g.pos_w; ++pw) {
        for (std::size_t kh = 0; kh < g.kernel; ++kh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(ph * g.stride + kh) - pad;
          for (std::size_t kw = 0; kw < g.kernel; ++kw) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(pw * g.stride + kw) - pad;
            if (ih < 0 || iw < 0 || ih >= static_cast<std::ptrdiff_t>(g.image_h) ||
                iw >= static_cast<std::ptrdiff_t>(g.image_w)) {
              in += g.channels;
            } else {
              double* dst = img + (static_cast<std::size_t>(ih) * g.image_w +
                                   static_cast<std::size_t>(iw)) * g.channels;
              for (std::size_t c = 0; c < g.channels; ++c) dst[c] += *in++;
            }
          }
        }
      }
    }
  }
}

Patch conv_patch(const Shape& in, const Shape& out, const LayerSpec& spec) {
  return {in.height, in.width, in.channels, out.height, out.width, spec.kernel, spec.stride, spec.padding};
}

Patch conv_transpose_patch(const Shape& in, const Shape& out, const LayerSpec& spec) {
  return {out.height, out.width, out.channels, in.height, in.width, spec.kernel, spec.stride, spec.padding};
}

std::string layer_name(std::size_t i, const LayerSpec& spec) {
  return "layer " + std::to_string(i) + " (" + to_string(spec.kind) + ")";
}

}  // namespace

Network::Network(Shape input, std::vector<LayerSpec> layers) : input_(input), layers_(std::move(layers)) {
  if (input_.size() == 0) throw InvalidArgument("network input shape has zero size");
  Shape cur = input_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    ParamSlice slice{parameter_count_, 0, 0};
    Shape next = cur;
    switch (l.kind) {
      case LayerKind::dense:
        if (l.units == 0) throw InvalidArgument(layer_name(i, l) + ": zero units");
        next = Shape{1, 1, l.units};
        slice.weights = l.units * cur.size();
        slice.biases = l.units;
        break;
      case LayerKind::conv: {
        if (l.filters == 0 || l.kernel == 0 || l.stride == 0) {
          throw InvalidArgument(layer_name(i, l) + ": filters, kernel and stride must be positive");
        }
        if (cur.height + 2 * l.padding < l.kernel || cur.width + 2 * l.padding < l.kernel) {
          throw InvalidArgument(layer_name(i, l) + ": kernel " + std::to_string(l.kernel) +
                                " larger than padded input " + cur.str());
        }
        next = Shape{(cur.height + 2 * l.padding - l.kernel) / l.stride + 1,
                     (cur.width + 2 * l.padding - l.kernel) / l.stride + 1, l.filters};
        slice.weights = l.filters * l.kernel * l.kernel * cur.channels;
        slice.biases = l.filters;
        break;
      }
      case LayerKind::conv_transpose: {
        if (l.filters == 0 || l.kernel == 0 || l.stride == 0) {
          throw InvalidArgument(layer_name(i, l) + ": filters, kernel and stride must be positive");
        }
        if (l.output_padding >= l.stride) {
          throw InvalidArgument(layer_name(i, l) + ": output_padding must be smaller than stride");
        }
        const auto grow = [&](std::size_t n) -> std::ptrdiff_t {
          return static_cast<std::ptrdiff_t>((n - 1) * l.stride + l.kernel + l.output_padding) -
                 static_cast<std::ptrdiff_t>(2 * l.padding);
        };
        if (grow(cur.height) < 1 || grow(cur.width) < 1) {
          throw InvalidArgument(layer_name(i, l) + ": padding too large for input " + cur.str());
        }
        next = Shape{static_cast<std::size_t>(grow(cur.height)), static_cast<std::size_t>(grow(cur.width)),
                     l.filters};
        slice.weights = cur.channels * l.kernel * l.kernel * l.filters;
        slice.biases = l.filters;
        break;
      }
      case LayerKind::reshape:
        if (l.target.size() != cur.size()) {
          throw InvalidArgument(layer_name(i, l) + ": cannot reshape " + cur.str() + " to " + l.target.str());
        }
        next = l.target;
        break;
      case LayerKind::activation:
        break;
    }
    parameter_count_ += slice.size();
    registry_.push_back(slice);
    shapes_.push_back(next);
    cur = next;
  }
}

ParamSet init_params(const Network& network, std::uint64_t seed) {
  ParamSet p;
  p.registry = network.registry();
  p.values.assign(network.parameter_count(), 0.0);
  Rng rng(seed);
  for (std::size_t i = 0; i < network.layers().size(); ++i) {
    const auto& l = network.layers()[i];
    const auto& slice = p.registry[i];
    if (slice.weights == 0) continue;
    const Shape& in = network.layer_input(i);
    std::size_t fan_in = 0;
    switch (l.kind) {
      case LayerKind::dense: fan_in = in.size(); break;
      case LayerKind::conv:
      case LayerKind::conv_transpose: fan_in = l.kernel * l.kernel * in.channels; break;
      default: break;
    }
    const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (std::size_t k = 0; k < slice.weights; ++k) {
      p.values[slice.offset + k] = rng.uniform(-limit, limit);
    }
  }
  return p;
}

Tensor4 forward(const Network& network, std::span<const double> params, const Tensor4& input,
                ForwardCache* cache) {
  if (params.size() != network.parameter_count()) {
    throw InvalidArgument("forward: expected " + std::to_string(network.parameter_count()) +
                          " parameters, got " + std::to_string(params.size()));
  }
  if (!(input.shape() == network.input_shape())) {
    throw InvalidArgument("forward: input shape " + input.shape().str() + " does not match network input " +
                          network.input_shape().str());
  }
  if (cache) {
    cache->network = &network;
    cache->inputs.clear();
    cache->inputs.reserve(network.layers().size());
  }

  const std::size_t batch = input.batch();
  Tensor4 cur = input;
  for (std::size_t i = 0; i < network.layers().size(); ++i) {
    const LayerSpec& l = network.layers()[i];
    const ParamSlice& slice = network.registry()[i];
    const Shape& in_shape = network.layer_input(i);
    const Shape& out_shape = network.layer_output(i);
    const double* w = params.data() + slice.offset;
    Tensor4 next;
    switch (l.kind) {
      case LayerKind::dense: {
        next = Tensor4(batch, out_shape);
        const ConstMatMap wm(w, static_cast<Eigen::Index>(l.units), static_cast<Eigen::Index>(in_shape.size()));
        const ConstVecMap bias(w + slice.weights, static_cast<Eigen::Index>(l.units));
        auto y = next.matrix();
        y.noalias() = wm * cur.matrix();
        y.colwise() += bias;
        break;
      }
      case LayerKind::conv: {
        next = Tensor4(batch, out_shape);
        const Patch g = conv_patch(in_shape, out_shape, l);
        const Eigen::MatrixXd p = im2col(cur.data(), batch, g);
        const ConstMatMap wm(w, static_cast<Eigen::Index>(l.filters), static_cast<Eigen::Index>(g.rows()));
        const ConstVecMap bias(w + slice.weights, static_cast<Eigen::Index>(l.filters));
        MatMap y(next.data().data(), static_cast<Eigen::Index>(l.filters), p.cols());
        y.noalias() = wm * p;
        y.colwise() += bias;
        break;
      }
      case LayerKind::conv_transpose: {
        next = Tensor4(batch, out_shape);
        const Patch g = conv_transpose_patch(in_shape, out_shape, l);
        const ConstMatMap wm(w, static_cast<Eigen::Index>(in_shape.channels), static_cast<Eigen::Index>(g.rows()));
        const ConstMatMap x(cur.data().data(), static_cast<Eigen::Index>(in_shape.channels),
                            static_cast<Eigen::Index>(batch * in_shape.height * in_shape.width));
        const Eigen::MatrixXd p = wm.transpose() * x;
        col2im(p, next.data(), batch, g);
        const ConstVecMap bias(w + slice.weights, static_cast<Eigen::Index>(l.filters));
        MatMap y(next.data().data(), static_cast<Eigen::Index>(l.filters),
                 static_cast<Eigen::Index>(batch * out_shape.height * out_shape.width));
        y.colwise() += bias;
        break;
      }
      case LayerKind::reshape:
        next = cur;
        next.reshape(out_shape);
        break;
      case LayerKind::activation:
        next = cur;
        if (l.activation == Activation::elu) {
          for (double& v : next.data()) v = v > 0.0 ? v : std::expm1(v);
        }
        break;
    }
    if (cache) cache->inputs.push_back(std::move(cur));
    cur = std::move(next);
  }
  if (cache) cache->output = cur;
  return cur;
}

Gradients backward(const Network& network, std::span<const double> params, const ForwardCache& cache,
                   const Tensor4& upstream) {
  if (cache.network != &network || cache.inputs.size() != network.layers().size()) {
    throw InvalidArgument("backward: cache was not produced by this network");
  }
  if (params.size() != network.parameter_count()) {
    throw InvalidArgument("backward: parameter length mismatch");
  }
  if (!(upstream.shape() == cache.output.shape()) || upstream.batch() != cache.output.batch()) {
    throw InvalidArgument("backward: upstream gradient " + upstream.shape().str() +
                          " does not match cached output " + cache.output.shape().str());
  }

  Gradients out;
  out.params.assign(network.parameter_count(), 0.0);
  const std::size_t batch = upstream.batch();
  Tensor4 grad = upstream;
  for (std::size_t i = network.layers().size(); i-- > 0;) {
    const LayerSpec& l = network.layers()[i];
    const ParamSlice& slice = network.registry()[i];
    const Shape& in_shape = network.layer_input(i);
    const Shape& out_shape = network.layer_output(i);
    const Tensor4& x = cache.inputs[i];
    const double* w = params.data() + slice.offset;
    double* gw = out.params.data() + slice.offset;
    Tensor4 gin;
    switch (l.kind) {
      case LayerKind::dense: {
        gin = Tensor4(batch, in_shape);
        const auto units = static_cast<Eigen::Index>(l.units);
        const auto in_size = static_cast<Eigen::Index>(in_shape.size());
        const ConstMatMap wm(w, units, in_size);
        const auto g = std::as_const(grad).matrix();
        MatMap(gw, units, in_size).noalias() = g * x.matrix().transpose();
        Eigen::Map<Eigen::VectorXd>(gw + slice.weights, units) = g.rowwise().sum();
        gin.matrix().noalias() = wm.transpose() * g;
        break;
      }
      case LayerKind::conv: {
        gin = Tensor4(batch, in_shape);
        const Patch g = conv_patch(in_shape, out_shape, l);
        const auto filters = static_cast<Eigen::Index>(l.filters);
        const auto rows = static_cast<Eigen::Index>(g.rows());
        const auto cols = static_cast<Eigen::Index>(batch * out_shape.height * out_shape.width);
        const ConstMatMap wm(w, filters, rows);
        const ConstMatMap gy(grad.data().data(), filters, cols);
        const Eigen::MatrixXd p = im2col(x.data(), batch, g);
        MatMap(gw, filters, rows).noalias() = gy * p.transpose();
        Eigen::Map<Eigen::VectorXd>(gw + slice.weights, filters) = gy.rowwise().sum();
        const Eigen::MatrixXd gp = wm.transpose() * gy;
        col2im(gp, gin.data(), batch, g);
        break;
      }
      case LayerKind::conv_transpose: {
        gin = Tensor4(batch, in_shape);
        const Patch g = conv_transpose_patch(in_shape, out_shape, l);
        const auto in_ch = static_cast<Eigen::Index>(in_shape.channels);
        const auto rows = static_cast<Eigen::Index>(g.rows());
        const auto positions = static_cast<Eigen::Index>(batch * in_shape.height * in_shape.width);
        const ConstMatMap wm(w, in_ch, rows);
        const ConstMatMap xm(x.data().data(), in_ch, positions);
        const Eigen::MatrixXd gp = im2col(grad.data(), batch, g);
        MatMap(gw, in_ch, rows).noalias() = xm * gp.transpose();
        const ConstMatMap gy(grad.data().data(), static_cast<Eigen::Index>(l.filters),
                             static_cast<Eigen::Index>(batch * out_shape.height * out_shape.width));
        Eigen::Map<Eigen::VectorXd>(gw + slice.weights, static_cast<Eigen::Index>(l.filters)) =
            gy.rowwise().sum();
        MatMap(gin.data().data(), in_ch, positions).noalias() = wm * gp;
        break;
      }
      case LayerKind::reshape:
        gin = std::move(grad);
        gin.reshape(in_shape);
        break;
      case LayerKind::activation:
        gin = std::move(grad);
        if (l.activation == Activation::elu) {
          auto gd = gin.data();
          auto xd = x.data();
          for (std::size_t k = 0; k < gd.size(); ++k) {
            if (xd[k] <= 0.0) gd[k] *= std::exp(xd[k]);
          }
        }
        break;
    }
    grad = std::move(gin);
  }
  out.input = std::move(grad);
  return out;
}

}  // namespace podlrom::nn
