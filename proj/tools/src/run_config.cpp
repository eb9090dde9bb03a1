#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "podlrom/binary_io.hpp"
#include "podlrom/error.hpp"

namespace podlrom::cli {
namespace {

using nlohmann::json;

// Key reader that remembers what was consumed so leftovers can be rejected.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument(where() + " must be a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument(where(key) + " has the wrong type");
    }
  }

  void positive(const char* key, double& out) {
    get(key, out);
    if (!(out > 0.0)) throw InvalidArgument(where(key) + " must be positive");
  }

  void positive(const char* key, std::size_t& out) {
    get(key, out);
    if (out == 0) throw InvalidArgument(where(key) + " must be positive");
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), where(key));
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InvalidArgument("unknown key " + where(key));
    }
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_adr(Section s, fom::AdrProblem& p) {
  s.get("grid_points", p.grid_points);
  s.get("dt", p.dt);
  s.get("final_time", p.final_time);
  s.get("reaction", p.reaction);
  s.get("source_amplitude", p.source_amplitude);
  s.get("source_width", p.source_width);
  s.finish();
}

void parse_monodomain(Section s, fom::MonodomainProblem& p) {
  s.get("grid_points", p.grid_points);
  s.get("length", p.length);
  s.get("dt", p.dt);
  s.get("final_time", p.final_time);
  if (const json* f = s.raw("fiber")) {
    if (!f->is_array() || f->size() != 2 || !(*f)[0].is_number() || !(*f)[1].is_number()) {
      throw InvalidArgument(s.where("fiber") + " must be a 2-element array");
    }
    p.fiber_x = (*f)[0].get<double>();
    p.fiber_y = (*f)[1].get<double>();
  }
  s.get("k", p.k);
  s.get("a", p.a);
  s.get("b", p.b);
  s.get("eps0", p.eps0);
  s.get("c1", p.c1);
  s.get("c2", p.c2);
  s.get("stimulus_current", p.stimulus_current);
  s.get("stimulus_alpha", p.stimulus_alpha);
  s.get("stimulus_beta", p.stimulus_beta);
  s.get("stimulus_duration", p.stimulus_duration);
  s.finish();
}

void parse_pulse1d(Section s, fom::Pulse1dProblem& p) {
  s.get("grid_points", p.grid_points);
  s.get("sigma", p.sigma);
  s.get("dt", p.dt);
  s.get("final_time", p.final_time);
  s.get("mu_min", p.mu_min);
  s.get("mu_max", p.mu_max);
  s.finish();
}

void parse_sampling(Section s, Sampling& out) {
  if (const json* axes = s.raw("axes")) {
    if (!axes->is_array()) throw InvalidArgument(s.where("axes") + " must be an array");
    for (std::size_t i = 0; i < axes->size(); ++i) {
      Section a((*axes)[i], s.where("axes") + "[" + std::to_string(i) + "]");
      fom::Axis axis;
      a.get("min", axis.min);
      a.get("max", axis.max);
      a.positive("count", axis.count);
      a.finish();
      if (axis.max < axis.min) throw InvalidArgument(a.where("max") + " is below min");
      out.axes.push_back(axis);
    }
  }
  if (const json* points = s.raw("points")) {
    try {
      out.points = points->get<std::vector<fom::ParameterTuple>>();
    } catch (const json::exception&) {
      throw InvalidArgument(s.where("points") + " must be an array of number arrays");
    }
  }
  if (!out.axes.empty() && !out.points.empty()) {
    throw InvalidArgument(s.where() + " gives both axes and points");
  }
  if (auto t = s.child("time")) {
    t->positive("count", out.time_count);
    t->positive("every", out.time_every);
    t->finish();
  }
  s.finish();
}

template <class T>
void non_empty(Section& s, const char* key, std::vector<T>& out) {
  s.get(key, out);
  if (out.empty()) throw InvalidArgument(s.where(key) + " must not be empty");
}

}  // namespace

std::vector<fom::ParameterTuple> Sampling::parameters() const {
  if (!points.empty()) return points;
  if (axes.empty()) throw InvalidArgument("sampling section defines no parameters");
  return fom::cartesian_grid(axes);
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section s(root, "");
  if (auto p = s.child("adr")) parse_adr(*p, c.adr);
  if (auto p = s.child("monodomain")) parse_monodomain(*p, c.monodomain);
  if (auto p = s.child("pulse1d")) parse_pulse1d(*p, c.pulse1d);
  if (auto p = s.child("sampling")) parse_sampling(*p, c.sampling);
  if (auto p = s.child("test_sampling")) parse_sampling(*p, c.test_sampling);
  if (auto r = s.child("rsvd")) {
    r->positive("rank", c.rsvd.rank);
    r->get("oversampling", c.rsvd.oversampling);
    r->get("power_iterations", c.rsvd.power_iterations);
    r->finish();
    if (c.rsvd.power_iterations > 2) throw InvalidArgument("rsvd.power_iterations must be 0, 1 or 2");
  }
  if (auto a = s.child("architecture")) {
    a->get("latent", c.latent);
    a->positive("kernel", c.architecture.kernel);
    non_empty(*a, "filters", c.architecture.filters);
    a->positive("dfnn_width", c.architecture.dfnn_width);
    a->get("dfnn_depth", c.architecture.dfnn_depth);
    a->finish();
    if (c.architecture.kernel % 2 == 0) throw InvalidArgument("architecture.kernel must be odd");
  }
  if (auto t = s.child("training")) {
    auto& tc = c.training;
    t->get("val_fraction", tc.val_fraction);
    t->positive("learning_rate", tc.learning_rate);
    t->positive("batch_size", tc.batch_size);
    t->positive("max_epochs", tc.max_epochs);
    t->get("patience", tc.patience);
    t->get("omega", tc.omega);
    t->get("target_loss", tc.target_loss);
    t->finish();
    if (!(tc.val_fraction > 0.0 && tc.val_fraction < 1.0)) {
      throw InvalidArgument("training.val_fraction must lie in (0, 1)");
    }
    if (!(tc.omega >= 0.0 && tc.omega <= 1.0)) throw InvalidArgument("training.omega must lie in [0, 1]");
  }
  if (auto st = s.child("study")) {
    non_empty(*st, "ranks", c.study.ranks);
    non_empty(*st, "n_train", c.study.n_train);
    non_empty(*st, "seeds", c.study.seeds);
    st->finish();
  }
  s.finish();
  c.adr.validate();
  c.monodomain.validate();
  c.pulse1d.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()));
}

std::unique_ptr<fom::FullOrderModel> make_model(const std::string& problem, const RunConfig& config) {
  if (problem == "adr") return std::make_unique<fom::AdrModel>(config.adr);
  if (problem == "monodomain") return std::make_unique<fom::MonodomainModel>(config.monodomain);
  if (problem == "pulse1d") return std::make_unique<fom::Pulse1dModel>(config.pulse1d);
  throw InvalidArgument("unknown problem '" + problem + "' (expected adr, monodomain or pulse1d)");
}

std::vector<double> sample_times(const std::string& problem, const RunConfig& config, const Sampling& sampling) {
  if (sampling.time_count == 0) throw InvalidArgument("sampling.time.count must be set");
  double dt = 0.0;
  if (problem == "adr") {
    dt = config.adr.dt;
  } else if (problem == "monodomain") {
    dt = config.monodomain.dt;
  } else if (problem == "pulse1d") {
    dt = config.pulse1d.dt;
  } else {
    throw InvalidArgument("unknown problem '" + problem + "'");
  }
  return fom::uniform_sample_times(sampling.time_count, sampling.time_every, dt);
}

}  // namespace podlrom::cli
