#include <algorithm>
#include <cmath>
#include <string>

#include "podlrom/dlrom.hpp"

namespace podlrom::dlrom {
namespace {

std::size_t integer_sqrt_of_power_of_four(std::size_t n) {
  if (n == 0) throw InvalidArgument("POD rank must be positive");
  std::size_t side = 1;
  while (side * side < n) side *= 2;
  if (side * side != n) {
    throw InvalidArgument("POD rank " + std::to_string(n) + " is not of the form 2^(2m)");
  }
  return side;
}

nn::Tensor4 params_tensor(const Eigen::Ref<const Eigen::MatrixXd>& params) {
  nn::Tensor4 t(static_cast<std::size_t>(params.cols()), nn::Shape{1, 1, static_cast<std::size_t>(params.rows())});
  t.matrix() = params;
  return t;
}

}  // namespace

std::size_t Architecture::side() const { return integer_sqrt_of_power_of_four(pod_rank); }

nn::Shape Architecture::image_shape() const { return nn::Shape{side(), side(), channels}; }

nn::Network Architecture::encoder_network() const { return nn::Network(image_shape(), encoder); }

nn::Network Architecture::dfnn_network() const { return nn::Network(nn::Shape{1, 1, n_params + 1}, dfnn); }

nn::Network Architecture::decoder_network() const { return nn::Network(nn::Shape{1, 1, latent}, decoder); }

std::size_t Architecture::parameter_count() const {
  return encoder_network().parameter_count() + dfnn_network().parameter_count() +
         decoder_network().parameter_count();
}

Architecture default_architecture(std::size_t pod_rank, std::size_t channels, std::size_t latent,
                                  std::size_t n_params, const ArchitectureOptions& options) {
  using nn::Activation;
  using nn::LayerSpec;
  if (latent == 0) throw InvalidArgument("latent dimension n must be positive");
  if (latent > pod_rank * channels) throw InvalidArgument("latent dimension n exceeds N * d");
  if (options.filters.empty()) throw InvalidArgument("architecture needs at least one conv layer");
  if (options.kernel % 2 == 0) throw InvalidArgument("architecture kernel size must be odd");

  Architecture a;
  a.pod_rank = pod_rank;
  a.channels = channels;
  a.latent = latent;
  a.n_params = n_params;
  const std::size_t k = options.kernel;
  const std::size_t pad = k / 2;

  std::vector<std::size_t> sides{integer_sqrt_of_power_of_four(pod_rank)};
  std::vector<std::size_t> strides;
  for (std::size_t i = 0; i < options.filters.size(); ++i) {
    const std::size_t cur = sides.back();
    const std::size_t stride = (i == 0 || cur == 1) ? 1 : 2;
    strides.push_back(stride);
    sides.push_back((cur + 2 * pad - k) / stride + 1);
    a.encoder.push_back(LayerSpec::conv(options.filters[i], k, stride, pad));
    a.encoder.push_back(LayerSpec::act(Activation::elu));
  }
  a.encoder.push_back(LayerSpec::dense(latent));

  for (std::size_t i = 0; i < options.dfnn_depth; ++i) {
    a.dfnn.push_back(LayerSpec::dense(options.dfnn_width));
    a.dfnn.push_back(LayerSpec::act(Activation::elu));
  }
  a.dfnn.push_back(LayerSpec::dense(latent));

  const std::size_t last_side = sides.back();
  const std::size_t last_filters = options.filters.back();
  a.decoder.push_back(LayerSpec::dense(last_side * last_side * last_filters));
  a.decoder.push_back(LayerSpec::act(Activation::elu));
  a.decoder.push_back(LayerSpec::reshape(nn::Shape{last_side, last_side, last_filters}));
  for (std::size_t i = options.filters.size(); i-- > 0;) {
    const std::size_t out_channels = i == 0 ? channels : options.filters[i - 1];
    const std::size_t in_side = sides[i + 1];
    const std::size_t out_side = sides[i];
    const std::size_t base = (in_side - 1) * strides[i] + k - 2 * pad;
    a.decoder.push_back(LayerSpec::conv_transpose(out_channels, k, strides[i], pad, out_side - base));
    if (i != 0) a.decoder.push_back(LayerSpec::act(Activation::elu));
  }
  // Validate composition eagerly.
  (void)a.encoder_network();
  (void)a.dfnn_network();
  if (!(a.decoder_network().output_shape() == a.image_shape())) {
    throw InvalidArgument("decoder output " + a.decoder_network().output_shape().str() +
                          " does not match image shape " + a.image_shape().str());
  }
  return a;
}

std::vector<std::string> architecture_differences(const Architecture& a, const Architecture& b) {
  std::vector<std::string> out;
  auto dims = [&](const char* what, std::size_t x, std::size_t y) {
    if (x != y) out.push_back(std::string(what) + ": " + std::to_string(x) + " vs " + std::to_string(y));
  };
  dims("N", a.pod_rank, b.pod_rank);
  dims("d", a.channels, b.channels);
  dims("n", a.latent, b.latent);
  dims("n_mu", a.n_params, b.n_params);
  auto compare = [&](const char* name, const nn::Network& x, const nn::Network& y) {
    const std::size_t count = std::max(x.layers().size(), y.layers().size());
    for (std::size_t i = 0; i < count; ++i) {
      const bool hx = i < x.layers().size();
      const bool hy = i < y.layers().size();
      std::string sx = hx ? nn::to_string(x.layers()[i].kind) + " " + x.layer_input(i).str() + "->" +
                                x.layer_output(i).str()
                          : "<none>";
      std::string sy = hy ? nn::to_string(y.layers()[i].kind) + " " + y.layer_input(i).str() + "->" +
                                y.layer_output(i).str()
                          : "<none>";
      const bool same = hx && hy && x.layers()[i] == y.layers()[i] && x.layer_input(i) == y.layer_input(i);
      if (!same) out.push_back(std::string(name) + " layer " + std::to_string(i) + ": " + sx + " vs " + sy);
    }
  };
  try {
    compare("encoder", a.encoder_network(), b.encoder_network());
    compare("dfnn", a.dfnn_network(), b.dfnn_network());
    compare("decoder", a.decoder_network(), b.decoder_network());
  } catch (const InvalidArgument& e) {
    out.push_back(std::string("invalid architecture: ") + e.what());
  }
  return out;
}

nn::Tensor4 coords_to_images(const Eigen::Ref<const Eigen::MatrixXd>& coords, std::size_t pod_rank,
                             std::size_t channels) {
  const std::size_t side = integer_sqrt_of_power_of_four(pod_rank);
  if (static_cast<std::size_t>(coords.rows()) != pod_rank * channels) {
    throw InvalidArgument("coordinates have " + std::to_string(coords.rows()) + " rows, expected N * d = " +
                          std::to_string(pod_rank * channels));
  }
  const auto batch = static_cast<std::size_t>(coords.cols());
  nn::Tensor4 t(batch, nn::Shape{side, side, channels});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t k = 0; k < channels; ++k) {
      for (std::size_t p = 0; p < pod_rank; ++p) {
        t(b, p / side, p % side, k) = coords(static_cast<Eigen::Index>(k * pod_rank + p), static_cast<Eigen::Index>(b));
      }
    }
  }
  return t;
}

Eigen::MatrixXd images_to_coords(const nn::Tensor4& images) {
  const auto& s = images.shape();
  if (s.height != s.width) throw InvalidArgument("images_to_coords: image is not square");
  const std::size_t n = s.height * s.width;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n * s.channels), static_cast<Eigen::Index>(images.batch()));
  for (std::size_t b = 0; b < images.batch(); ++b) {
    for (std::size_t k = 0; k < s.channels; ++k) {
      for (std::size_t p = 0; p < n; ++p) {
        out(static_cast<Eigen::Index>(k * n + p), static_cast<Eigen::Index>(b)) = images(b, p / s.width, p % s.width, k);
      }
    }
  }
  return out;
}

PodDlRomModel::PodDlRomModel(Architecture architecture, std::uint64_t seed) : architecture_(std::move(architecture)) {
  build_networks();
  // Independent streams per sub-network.
  theta_e_ = nn::init_params(encoder_, seed * 3 + 0).values;
  theta_df_ = nn::init_params(dfnn_, seed * 3 + 1).values;
  theta_d_ = nn::init_params(decoder_, seed * 3 + 2).values;
}

PodDlRomModel::PodDlRomModel(Architecture architecture, std::vector<double> encoder, std::vector<double> dfnn,
                             std::vector<double> decoder)
    : architecture_(std::move(architecture)),
      theta_e_(std::move(encoder)),
      theta_df_(std::move(dfnn)),
      theta_d_(std::move(decoder)) {
  build_networks();
  if (theta_e_.size() != encoder_.parameter_count() || theta_df_.size() != dfnn_.parameter_count() ||
      theta_d_.size() != decoder_.parameter_count()) {
    throw InvalidArgument("parameter vectors do not match the architecture");
  }
}

PodDlRomModel::PodDlRomModel(const PodDlRomModel& other)
    : architecture_(other.architecture_),
      theta_e_(other.theta_e_),
      theta_df_(other.theta_df_),
      theta_d_(other.theta_d_) {
  build_networks();
}

PodDlRomModel& PodDlRomModel::operator=(const PodDlRomModel& other) {
  if (this != &other) {
    architecture_ = other.architecture_;
    theta_e_ = other.theta_e_;
    theta_df_ = other.theta_df_;
    theta_d_ = other.theta_d_;
    build_networks();
    encoder_calls_ = 0;
  }
  return *this;
}

void PodDlRomModel::build_networks() {
  encoder_ = architecture_.encoder_network();
  dfnn_ = architecture_.dfnn_network();
  decoder_ = architecture_.decoder_network();
  if (encoder_.output_shape().size() != architecture_.latent) {
    throw InvalidArgument("encoder output size differs from latent dimension");
  }
  if (dfnn_.output_shape().size() != architecture_.latent) {
    throw InvalidArgument("dfnn output size differs from latent dimension");
  }
  if (!(decoder_.output_shape() == architecture_.image_shape())) {
    throw InvalidArgument("decoder output " + decoder_.output_shape().str() + " differs from image shape " +
                          architecture_.image_shape().str());
  }
}

nn::Tensor4 PodDlRomModel::encode(const nn::Tensor4& images, nn::ForwardCache* cache) const {
  ++encoder_calls_;
  return nn::forward(encoder_, theta_e_, images, cache);
}

nn::Tensor4 PodDlRomModel::latent(const Eigen::Ref<const Eigen::MatrixXd>& params, nn::ForwardCache* cache) const {
  return nn::forward(dfnn_, theta_df_, params_tensor(params), cache);
}

nn::Tensor4 PodDlRomModel::decode(const nn::Tensor4& latent, nn::ForwardCache* cache) const {
  return nn::forward(decoder_, theta_d_, latent, cache);
}

LossGradient loss_and_gradient(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                               const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega) {
  const auto& arch = model.architecture();
  if (params.cols() != coords.cols() || params.cols() == 0) {
    throw InvalidArgument("loss: parameter and coordinate batches differ or are empty");
  }
  const double inv_b = 1.0 / static_cast<double>(params.cols());
  const nn::Tensor4 target = coords_to_images(coords, arch.pod_rank, arch.channels);

  nn::ForwardCache c_df, c_d, c_e;
  const nn::Tensor4 z = model.latent(params, &c_df);
  const nn::Tensor4 recon = model.decode(z, &c_d);
  const nn::Tensor4 enc = model.encode(target, &c_e);

  LossGradient out;
  const auto zm = z.matrix();
  const auto em = enc.matrix();
  const Eigen::MatrixXd rec_diff = recon.matrix() - target.matrix();
  const Eigen::MatrixXd lat_diff = em - zm;
  out.terms.reconstruction = rec_diff.squaredNorm() * inv_b;
  out.terms.latent = lat_diff.squaredNorm() * inv_b;
  out.terms.total = 0.5 * omega * out.terms.reconstruction + 0.5 * (1.0 - omega) * out.terms.latent;
  if (!std::isfinite(out.terms.total)) throw NumericalError("loss: non-finite value");

  nn::Tensor4 g_recon(recon.batch(), recon.shape());
  g_recon.matrix() = (omega * inv_b) * rec_diff;
  nn::Gradients gd = nn::backward(model.decoder(), model.decoder_params(), c_d, g_recon);

  nn::Tensor4 g_enc(enc.batch(), enc.shape());
  g_enc.matrix() = ((1.0 - omega) * inv_b) * lat_diff;
  nn::Gradients ge = nn::backward(model.encoder(), model.encoder_params(), c_e, g_enc);

  nn::Tensor4 g_z = std::move(gd.input);
  g_z.matrix() -= g_enc.matrix();
  nn::Gradients gf = nn::backward(model.dfnn(), model.dfnn_params(), c_df, g_z);

  out.encoder = std::move(ge.params);
  out.dfnn = std::move(gf.params);
  out.decoder = std::move(gd.params);
  return out;
}

Eigen::VectorXd per_sample_loss(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                                const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega) {
  const auto& arch = model.architecture();
  if (params.cols() != coords.cols()) throw InvalidArgument("loss: parameter and coordinate batches differ");
  Eigen::VectorXd out(params.cols());
  constexpr Eigen::Index kChunk = 512;
  for (Eigen::Index first = 0; first < params.cols(); first += kChunk) {
    const Eigen::Index count = std::min(kChunk, params.cols() - first);
    const nn::Tensor4 z = model.latent(params.middleCols(first, count));
    const nn::Tensor4 recon = model.decode(z);
    const Eigen::MatrixXd target = coords.middleCols(first, count);
    const Eigen::VectorXd rec = (images_to_coords(recon) - target).colwise().squaredNorm().transpose();
    Eigen::VectorXd lat = Eigen::VectorXd::Zero(count);
    if (omega < 1.0) {
      const nn::Tensor4 enc = model.encode(coords_to_images(target, arch.pod_rank, arch.channels));
      lat = (enc.matrix() - z.matrix()).colwise().squaredNorm().transpose();
    }
    out.segment(first, count) = 0.5 * omega * rec + 0.5 * (1.0 - omega) * lat;
  }
  return out;
}

LossTerms evaluate_loss(const PodDlRomModel& model, const Eigen::Ref<const Eigen::MatrixXd>& params,
                        const Eigen::Ref<const Eigen::MatrixXd>& coords, double omega) {
  const auto& arch = model.architecture();
  if (params.cols() != coords.cols() || params.cols() == 0) {
    throw InvalidArgument("loss: parameter and coordinate batches differ or are empty");
  }
  LossTerms t;
  constexpr Eigen::Index kChunk = 512;
  for (Eigen::Index first = 0; first < params.cols(); first += kChunk) {
    const Eigen::Index count = std::min(kChunk, params.cols() - first);
    const nn::Tensor4 z = model.latent(params.middleCols(first, count));
    const nn::Tensor4 recon = model.decode(z);
    const nn::Tensor4 target = coords_to_images(coords.middleCols(first, count), arch.pod_rank, arch.channels);
    t.reconstruction += (recon.matrix() - target.matrix()).squaredNorm();
    if (omega < 1.0) t.latent += (model.encode(target).matrix() - z.matrix()).squaredNorm();
  }
  const double inv_b = 1.0 / static_cast<double>(params.cols());
  t.reconstruction *= inv_b;
  t.latent *= inv_b;
  t.total = 0.5 * omega * t.reconstruction + 0.5 * (1.0 - omega) * t.latent;
  return t;
}

}  // namespace podlrom::dlrom
