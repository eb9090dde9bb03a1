#include <string>

#include "podlrom/binary_io.hpp"
#include "podlrom/dlrom.hpp"

namespace podlrom::dlrom {
namespace {

constexpr std::uint64_t kVersion = 1;

void put_vec(io::BinaryWriter& w, std::span<const double> v) {
  w.u64(v.size());
  w.f64s(v);
}

std::vector<double> get_vec(io::BinaryReader& r, const char* what) {
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / 8) throw FormatError(std::string("truncated file: ") + what);
  return r.f64s(static_cast<std::size_t>(n));
}

std::uint64_t get_count(io::BinaryReader& r, std::uint64_t limit, const char* what) {
  const std::uint64_t n = r.u64();
  if (n > limit) throw FormatError(std::string("implausible ") + what + " " + std::to_string(n));
  return n;
}

void put_shape(io::BinaryWriter& w, const nn::Shape& s) {
  w.u64(s.height);
  w.u64(s.width);
  w.u64(s.channels);
}

nn::Shape get_shape(io::BinaryReader& r) {
  nn::Shape s;
  s.height = r.u64();
  s.width = r.u64();
  s.channels = r.u64();
  return s;
}

// Eleven u64 per layer: kind, units, filters, kernel, stride, padding,
// output padding, activation, target height, width, channels.
void put_layers(io::BinaryWriter& w, const nn::Shape& input, const std::vector<nn::LayerSpec>& layers) {
  put_shape(w, input);
  w.u64(layers.size());
  for (const auto& l : layers) {
    w.u64(static_cast<std::uint64_t>(l.kind));
    w.u64(l.units);
    w.u64(l.filters);
    w.u64(l.kernel);
    w.u64(l.stride);
    w.u64(l.padding);
    w.u64(l.output_padding);
    w.u64(static_cast<std::uint64_t>(l.activation));
    put_shape(w, l.target);
  }
}

std::vector<nn::LayerSpec> get_layers(io::BinaryReader& r, const nn::Shape& expected_input, const char* name) {
  const nn::Shape input = get_shape(r);
  if (!(input == expected_input)) {
    throw FormatError(std::string(name) + " input shape " + input.str() + " disagrees with the dimensions " +
                      expected_input.str());
  }
  const std::uint64_t count = get_count(r, 4096, "layer count");
  std::vector<nn::LayerSpec> layers;
  for (std::uint64_t i = 0; i < count; ++i) {
    nn::LayerSpec l;
    const std::uint64_t kind = r.u64();
    if (kind > static_cast<std::uint64_t>(nn::LayerKind::activation)) throw FormatError("unknown layer kind");
    l.kind = static_cast<nn::LayerKind>(kind);
    l.units = r.u64();
    l.filters = r.u64();
    l.kernel = r.u64();
    l.stride = r.u64();
    l.padding = r.u64();
    l.output_padding = r.u64();
    const std::uint64_t act = r.u64();
    if (act > static_cast<std::uint64_t>(nn::Activation::linear)) throw FormatError("unknown activation");
    l.activation = static_cast<nn::Activation>(act);
    l.target = get_shape(r);
    layers.push_back(l);
  }
  return layers;
}

void put_adam(io::BinaryWriter& w, const nn::AdamState& a) {
  w.u64(a.step);
  w.f64(a.hyper.learning_rate);
  w.f64(a.hyper.beta1);
  w.f64(a.hyper.beta2);
  w.f64(a.hyper.epsilon);
  put_vec(w, a.m);
  put_vec(w, a.v);
}

nn::AdamState get_adam(io::BinaryReader& r) {
  nn::AdamState a;
  a.step = r.u64();
  a.hyper.learning_rate = r.f64();
  a.hyper.beta1 = r.f64();
  a.hyper.beta2 = r.f64();
  a.hyper.epsilon = r.f64();
  a.m = get_vec(r, "adam moments");
  a.v = get_vec(r, "adam moments");
  return a;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  io::BinaryWriter w;
  w.magic("PDRC1");
  w.u64(kVersion);
  const Architecture& a = c.architecture;
  w.u64(a.pod_rank);
  w.u64(a.channels);
  w.u64(a.latent);
  w.u64(a.n_params);
  put_layers(w, a.image_shape(), a.encoder);
  put_layers(w, nn::Shape{1, 1, a.n_params + 1}, a.dfnn);
  put_layers(w, nn::Shape{1, 1, a.latent}, a.decoder);

  put_vec(w, c.stats.param_min);
  put_vec(w, c.stats.param_max);
  put_vec(w, c.stats.coord_min);
  put_vec(w, c.stats.coord_max);

  put_vec(w, c.encoder);
  put_vec(w, c.dfnn);
  put_vec(w, c.decoder);

  put_adam(w, c.adam_encoder);
  put_adam(w, c.adam_dfnn);
  put_adam(w, c.adam_decoder);

  w.u64(c.epochs);
  w.f64(c.best_val_loss);
  w.f64(c.history.initial_val_loss);
  w.u64(c.history.best_epoch);
  put_vec(w, c.history.train_loss);
  put_vec(w, c.history.val_loss);

  const TrainConfig& t = c.config;
  w.f64(t.val_fraction);
  w.f64(t.learning_rate);
  w.u64(t.batch_size);
  w.u64(t.max_epochs);
  w.u64(t.patience);
  w.f64(t.omega);
  w.u64(t.shuffle_seed);
  w.u64(t.init_seed);
  w.f64(t.target_loss);

  w.u64(c.provenance.rank);
  w.u64(c.provenance.oversampling);
  w.u64(c.provenance.power_iterations);
  w.u64(c.provenance.seed);
  return w.buffer();
}

Checkpoint decode_checkpoint(std::vector<std::uint8_t> bytes) {
  io::BinaryReader r(std::move(bytes));
  r.expect_magic("PDRC1");
  const std::uint64_t version = r.u64();
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint c;
  Architecture& a = c.architecture;
  a.pod_rank = get_count(r, 1u << 24, "POD rank");
  a.channels = get_count(r, 64, "channel count");
  a.latent = get_count(r, 1u << 24, "latent dimension");
  a.n_params = get_count(r, 1u << 16, "parameter count");
  try {
    a.encoder = get_layers(r, a.image_shape(), "encoder");
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad architecture: ") + e.what());
  }
  a.dfnn = get_layers(r, nn::Shape{1, 1, a.n_params + 1}, "dfnn");
  a.decoder = get_layers(r, nn::Shape{1, 1, a.latent}, "decoder");

  c.stats.param_min = get_vec(r, "stats");
  c.stats.param_max = get_vec(r, "stats");
  c.stats.coord_min = get_vec(r, "stats");
  c.stats.coord_max = get_vec(r, "stats");

  c.encoder = get_vec(r, "encoder parameters");
  c.dfnn = get_vec(r, "dfnn parameters");
  c.decoder = get_vec(r, "decoder parameters");

  c.adam_encoder = get_adam(r);
  c.adam_dfnn = get_adam(r);
  c.adam_decoder = get_adam(r);

  c.epochs = r.u64();
  c.best_val_loss = r.f64();
  c.history.initial_val_loss = r.f64();
  c.history.best_epoch = r.u64();
  c.history.train_loss = get_vec(r, "history");
  c.history.val_loss = get_vec(r, "history");

  TrainConfig& t = c.config;
  t.val_fraction = r.f64();
  t.learning_rate = r.f64();
  t.batch_size = r.u64();
  t.max_epochs = r.u64();
  t.patience = r.u64();
  t.omega = r.f64();
  t.shuffle_seed = r.u64();
  t.init_seed = r.u64();
  t.target_loss = r.f64();

  c.provenance.rank = r.u64();
  c.provenance.oversampling = r.u64();
  c.provenance.power_iterations = r.u64();
  c.provenance.seed = r.u64();
  r.expect_end();

  try {
    (void)c.model();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint is inconsistent: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  io::BinaryWriter w;
  w.bytes(encode_checkpoint(checkpoint));
  w.save(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_file(path)); }

}  // namespace podlrom::dlrom
