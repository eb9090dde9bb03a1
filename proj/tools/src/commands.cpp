#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>

#include "CLI11.hpp"
#include "json.hpp"
#include "podlrom/binary_io.hpp"
#include "podlrom/dlrom.hpp"
#include "podlrom/error.hpp"
#include "podlrom/metrics.hpp"
#include "podlrom/random.hpp"
#include "podlrom/studies.hpp"
#include "run_config.hpp"

namespace podlrom::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Written beside the main output as <out>.manifest.json once the
// configuration has been accepted, whether or not the run succeeds.
struct Manifest {
  std::string command;
  fs::path out;
  std::uint64_t config_hash = 0;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> inputs;
  std::optional<double> train_seconds;
  bool armed = false;

  void arm(const fs::path& output, std::uint64_t hash) {
    out = output;
    config_hash = hash;
    armed = true;
  }

  void write(const std::string& status, const std::string& error, double seconds) const {
    if (!armed) return;
    ordered_json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
    j["config_hash"] = hash;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["output"] = out.string();
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    j["wall_seconds"] = seconds;
    if (train_seconds) j["train_seconds"] = *train_seconds;
    std::ofstream f(out.string() + ".manifest.json");
    f << j.dump(2) << '\n';
  }
};

std::uint64_t hash_file(const fs::path& path) { return io::fnv1a64(io::read_file(path)); }

std::uint64_t hash_args(const std::vector<std::string>& args) {
  std::string joined;
  for (const auto& a : args) joined += a + '\n';
  return io::fnv1a64(joined);
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

std::size_t latent_of(const RunConfig& config, std::size_t n_params) {
  return config.latent == 0 ? n_params + 1 : config.latent;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

// Rows of (t, mu_1, ..., mu_p); blank lines, '#' comments and a
// non-numeric header line are skipped.
Eigen::MatrixXd read_params_csv(const fs::path& path) {
  const auto bytes = io::read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": not a numeric row");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument(path.string() + " contains no parameter rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t i = 0; i < rows[j].size(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
    }
  }
  return m;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stoul(cell));
    } catch (const std::exception&) {
      throw InvalidArgument("'" + cell + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

struct Options {
  std::string problem, config, out, in, snaps, basis, warm_start, ckpt, params, truth, approx, train_set,
      test_set, ranks, mu;
  std::uint64_t seed = 0;
  std::size_t n = 16, oversampling = 8, power = 2, reps = 5, rows = 256, cols = 400;
  bool verbose = false;
  std::string split = "train";
};

using Command = std::function<void(const Options&, Manifest&, std::ostream&)>;

void cmd_gen(const Options& o, Manifest& m, std::ostream& out) {
  const RunConfig cfg = load_run_config(o.config);
  m.arm(o.out, hash_file(o.config));
  const auto model = make_model(o.problem, cfg);
  const Sampling& sampling = o.split == "test" ? cfg.test_sampling : cfg.sampling;
  const auto params = sampling.parameters();
  const auto times = sample_times(o.problem, cfg, sampling);
  m.seeds["seed"] = o.seed;
  m.inputs["problem"] = o.problem;
  m.inputs["split"] = o.split;
  const Dataset ds = fom::build_dataset(*model, params, times);
  write_pdrs(o.out, ds);
  out << "wrote " << ds.snapshots.data.rows() << " x " << ds.samples() << " snapshots to " << o.out << '\n';
}

void cmd_rsvd(const Options& o, Manifest& m, std::ostream& out) {
  rpod::RsvdConfig cfg{o.n, o.oversampling, o.power, o.seed};
  m.arm(o.out, hash_args({"rsvd", std::to_string(o.n), std::to_string(o.oversampling), std::to_string(o.power)}));
  const Dataset ds = read_pdrs(o.in);
  for (std::size_t c = 0; c < ds.snapshots.layout.channels(); ++c) {
    cfg.validate(ds.snapshots.layout.rows(c), ds.samples());
  }
  m.seeds["rsvd"] = o.seed;
  m.inputs["snapshots"] = o.in;
  const auto basis = rpod::compute_basis(ds.snapshots, cfg);
  rpod::write_pdrb(o.out, basis);
  out << "projection error " << rpod::projection_error(basis, ds.snapshots) << '\n';
}

void cmd_train(const Options& o, Manifest& m, std::ostream& out) {
  const RunConfig cfg = config_or_default(o.config);
  m.arm(o.out, o.config.empty() ? hash_args({"train"}) : hash_file(o.config));
  const Dataset ds = read_pdrs(o.snaps);
  const auto basis = rpod::read_pdrb(o.basis);
  dlrom::TrainConfig tc = cfg.training;
  tc.shuffle_seed = o.seed;
  tc.init_seed = o.seed;
  tc.validate(ds.samples());
  const auto arch = dlrom::default_architecture(basis.rank(), basis.channel_count(),
                                                latent_of(cfg, ds.parameters.n_params()),
                                                ds.parameters.n_params(), cfg.architecture);
  std::optional<dlrom::Checkpoint> warm;
  if (!o.warm_start.empty()) warm = dlrom::load_checkpoint(o.warm_start);
  m.seeds["shuffle"] = tc.shuffle_seed;
  m.seeds["init"] = tc.init_seed;
  m.seeds["rsvd"] = basis.config.seed;
  m.inputs["snapshots"] = o.snaps;
  m.inputs["basis"] = o.basis;
  if (warm) m.inputs["warm_start"] = o.warm_start;

  auto state = warm ? dlrom::warm_start(*warm, ds, basis, arch, tc) : dlrom::prepare_training(ds, basis, arch, tc);
  out << "parameters " << arch.parameter_count() << '\n';
  const auto t0 = std::chrono::steady_clock::now();
  const auto ck = dlrom::run_training(std::move(state), [&](std::size_t e, double tr, double va) {
    if (o.verbose || e % 100 == 0) out << "epoch " << e << " train " << tr << " val " << va << '\n';
  });
  m.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  dlrom::save_checkpoint(o.out, ck);
  out << "epochs " << ck.epochs << " best epoch " << ck.history.best_epoch << " best val " << ck.best_val_loss
      << '\n';
}

void cmd_infer(const Options& o, Manifest& m, std::ostream& out) {
  m.arm(o.out, hash_args({"infer"}));
  const auto ck = dlrom::load_checkpoint(o.ckpt);
  const auto basis = rpod::read_pdrb(o.basis);
  Eigen::MatrixXd params;
  std::size_t n_inst = 0, n_t = 1;
  const bool is_pdrs = fs::path(o.params).extension() == ".pdrs";
  if (is_pdrs) {
    const Dataset ds = read_pdrs(o.params);
    params = ds.parameters.data;
    n_inst = ds.snapshots.n_train;
    n_t = ds.snapshots.n_t;
  } else {
    params = read_params_csv(o.params);
    n_inst = static_cast<std::size_t>(params.cols());
  }
  m.inputs["checkpoint"] = o.ckpt;
  m.inputs["basis"] = o.basis;
  m.inputs["params"] = o.params;
  Dataset result;
  result.snapshots.data = dlrom::infer(ck.model(), ck.stats, basis, params);
  result.snapshots.layout = basis.layout();
  result.snapshots.n_train = n_inst;
  result.snapshots.n_t = n_t;
  result.parameters.data = params;
  write_pdrs(o.out, result);
  out << "wrote " << params.cols() << " approximations to " << o.out << '\n';
}

void cmd_eval(const Options& o, Manifest& m, std::ostream& out) {
  m.arm(o.out, hash_args({"eval"}));
  const Dataset truth = read_pdrs(o.truth);
  const Dataset approx = read_pdrs(o.approx);
  if (truth.snapshots.data.rows() != approx.snapshots.data.rows() || truth.samples() != approx.samples()) {
    throw InvalidArgument("truth and approximation have different shapes");
  }
  m.inputs["truth"] = o.truth;
  m.inputs["approx"] = o.approx;
  const auto report = eval::error_report(truth.snapshots.data, approx.snapshots.data, truth.parameters.data.row(0),
                                         truth.snapshots.n_train, truth.snapshots.n_t);
  write_text(o.out, eval::error_report_csv(report));
  out << "eps_rel " << report.eps_rel << '\n';
}

eval::ModelRecipe recipe_of(const RunConfig& cfg, std::size_t n_params, std::uint64_t seed) {
  eval::ModelRecipe r;
  r.rsvd = cfg.rsvd;
  r.rsvd.seed = seed;
  r.architecture = cfg.architecture;
  r.latent = latent_of(cfg, n_params);
  r.train = cfg.training;
  r.train.shuffle_seed = seed;
  r.train.init_seed = seed;
  return r;
}

void cmd_study_n(const Options& o, Manifest& m, std::ostream& out) {
  const RunConfig cfg = config_or_default(o.config);
  m.arm(o.out, o.config.empty() ? hash_args({"study-n", o.ranks}) : hash_file(o.config));
  const Dataset train_set = read_pdrs(o.train_set);
  const Dataset test_set = read_pdrs(o.test_set);
  const auto ranks = o.ranks.empty() ? cfg.study.ranks : parse_list(o.ranks);
  m.seeds["seed"] = o.seed;
  m.inputs["train"] = o.train_set;
  m.inputs["test"] = o.test_set;
  const auto result =
      eval::study_vs_n(train_set, test_set, ranks, recipe_of(cfg, train_set.parameters.n_params(), o.seed));
  write_text(o.out, eval::study_n_csv(result));
  out << eval::study_n_csv(result);
  if (!result.projection_monotone) throw NumericalError("projection error is not monotone in N");
}

void cmd_study_ntrain(const Options& o, Manifest& m, std::ostream& out) {
  const RunConfig cfg = load_run_config(o.config);
  m.arm(o.out, hash_file(o.config));
  const auto model = make_model(o.problem, cfg);
  if (cfg.sampling.axes.empty()) throw InvalidArgument("study-ntrain needs sampling.axes as the parameter box");
  const auto times = sample_times(o.problem, cfg, cfg.sampling);
  const auto test_params = cfg.test_sampling.parameters();
  const auto test_times = sample_times(o.problem, cfg, cfg.test_sampling);
  m.seeds["seed"] = o.seed;
  m.inputs["problem"] = o.problem;
  const Dataset test_set = fom::build_dataset(*model, test_params, test_times);
  std::vector<std::uint64_t> seeds;
  for (auto s : cfg.study.seeds) seeds.push_back(s + o.seed);
  const auto result = eval::study_vs_ntrain(*model, eval::box_sampler(cfg.sampling.axes), times, cfg.study.n_train,
                                            seeds, test_set, recipe_of(cfg, model->parameter_count(), o.seed));
  write_text(o.out, eval::study_ntrain_csv(result));
  out << eval::study_ntrain_csv(result);
}

void cmd_bench(const Options& o, Manifest& m, std::ostream& out) {
  const RunConfig cfg = load_run_config(o.config);
  m.arm(o.out, hash_file(o.config));
  const auto model = make_model(o.problem, cfg);
  const auto ck = dlrom::load_checkpoint(o.ckpt);
  const auto basis = rpod::read_pdrb(o.basis);
  const auto times = sample_times(o.problem, cfg, cfg.test_sampling.time_count ? cfg.test_sampling : cfg.sampling);
  std::vector<double> mu;
  std::stringstream ss(o.mu);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      mu.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InvalidArgument("--mu: '" + cell + "' is not a number");
    }
  }
  std::optional<double> train_seconds;
  const fs::path side = o.ckpt + ".manifest.json";
  if (fs::exists(side)) {
    const auto bytes = io::read_file(side);
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_object() && j.contains("train_seconds")) train_seconds = j["train_seconds"].get<double>();
  }
  m.inputs["checkpoint"] = o.ckpt;
  m.inputs["basis"] = o.basis;
  const auto report = eval::bench(ck, basis, *model, mu, times, o.reps, train_seconds);
  write_text(o.out, eval::bench_report_text(report));
  out << eval::bench_report_text(report);
}

void cmd_bench_svd(const Options& o, Manifest& m, std::ostream& out) {
  const auto ranks = parse_list(o.ranks.empty() ? "4,16,64" : o.ranks);
  if (o.rows == 0 || o.cols == 0 || o.reps == 0) throw InvalidArgument("rows, cols and reps must be positive");
  m.seeds["seed"] = o.seed;
  m.arm(o.out, hash_args({"bench-svd", std::to_string(o.rows), std::to_string(o.cols), o.ranks}));

  // S = U diag(2^-k) V^T with random orthogonal factors.
  Rng rng(o.seed);
  const auto r = static_cast<Eigen::Index>(std::min(o.rows, o.cols));
  auto orthogonal = [&](Eigen::Index n) {
    Eigen::MatrixXd g(n, r);
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    return Eigen::MatrixXd(Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(n, r));
  };
  Eigen::VectorXd sigma(r);
  for (Eigen::Index k = 0; k < r; ++k) sigma(k) = std::pow(2.0, -static_cast<double>(k));
  const Eigen::MatrixXd s = orthogonal(static_cast<Eigen::Index>(o.rows)) * sigma.asDiagonal() *
                            orthogonal(static_cast<Eigen::Index>(o.cols)).transpose();

  auto seconds = [&](auto&& f) {
    std::vector<double> t;
    for (std::size_t i = 0; i < o.reps; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      f();
      t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
  };
  std::ostringstream csv;
  csv << "# timings are hardware-dependent\nN,rsvd_seconds,svd_seconds,rsvd_error,svd_error\n";
  for (std::size_t n : ranks) {
    rpod::RsvdConfig cfg{n, std::min<std::size_t>(o.oversampling, static_cast<std::size_t>(r) - std::min<std::size_t>(n, r)),
                         o.power, o.seed};
    cfg.validate(o.rows, o.cols);
    rpod::RsvdResult approx;
    const double t_r = seconds([&] { approx = rpod::rsvd(s, cfg); });
    Eigen::MatrixXd exact;
    const double t_s = seconds([&] {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU);
      exact = svd.matrixU().leftCols(static_cast<Eigen::Index>(n));
    });
    const double e_r = (s - approx.basis * (approx.basis.transpose() * s)).norm() / s.norm();
    const double e_s = (s - exact * (exact.transpose() * s)).norm() / s.norm();
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%.6e,%.6e,%.6e,%.6e\n", n, t_r, t_s, e_r, e_s);
    csv << line;
  }
  write_text(o.out, csv.str());
  out << csv.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"podlrom: POD-DL-ROM reduced order modelling"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  std::map<CLI::App*, std::pair<std::string, Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, Command fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    commands[sub] = {name, std::move(fn)};
    return sub;
  };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "PRNG seed")->default_val(0); };
  auto out_opt = [&](CLI::App* s, const std::string& what) { s->add_option("--out", o.out, what)->required(); };

  auto* gen = add("gen", "solve a full order model over a parameter sample", cmd_gen);
  gen->add_option("--problem", o.problem, "adr, monodomain or pulse1d")
      ->required()
      ->check(CLI::IsMember({"adr", "monodomain", "pulse1d"}));
  gen->add_option("--config", o.config, "JSON run configuration")->required();
  gen->add_option("--split", o.split, "sampling section to use")->check(CLI::IsMember({"train", "test"}));
  out_opt(gen, "snapshot file (.pdrs)");
  seed(gen);

  auto* rs = add("rsvd", "randomized POD basis of a snapshot file", cmd_rsvd);
  rs->add_option("--in", o.in, "snapshot file")->required();
  rs->add_option("--n", o.n, "basis rank N")->default_val(16);
  rs->add_option("--oversampling", o.oversampling, "oversampling p")->default_val(8);
  rs->add_option("--power", o.power, "power iterations q")->default_val(2);
  out_opt(rs, "basis file (.pdrb)");
  seed(rs);

  auto* tr = add("train", "train a POD-DL-ROM", cmd_train);
  tr->add_option("--snaps", o.snaps, "snapshot file")->required();
  tr->add_option("--basis", o.basis, "basis file")->required();
  tr->add_option("--config", o.config, "JSON run configuration");
  tr->add_option("--warm-start", o.warm_start, "checkpoint to initialize from");
  tr->add_flag("--verbose", o.verbose, "print every epoch");
  out_opt(tr, "checkpoint file (.pdrc)");
  seed(tr);

  auto* inf = add("infer", "evaluate a trained model", cmd_infer);
  inf->add_option("--ckpt", o.ckpt, "checkpoint")->required();
  inf->add_option("--basis", o.basis, "basis file")->required();
  inf->add_option("--params", o.params, "CSV rows (t, mu...) or a .pdrs file")->required();
  out_opt(inf, "approximation file (.pdrs)");

  auto* ev = add("eval", "error indicators of an approximation", cmd_eval);
  ev->add_option("--truth", o.truth, "reference snapshots")->required();
  ev->add_option("--approx", o.approx, "approximate snapshots")->required();
  out_opt(ev, "report CSV");

  auto* sn = add("study-n", "error versus basis rank N", cmd_study_n);
  sn->add_option("--train", o.train_set, "training snapshots")->required();
  sn->add_option("--test", o.test_set, "test snapshots")->required();
  sn->add_option("--config", o.config, "JSON run configuration");
  sn->add_option("--ranks", o.ranks, "comma separated ranks (default from config)");
  out_opt(sn, "study CSV");
  seed(sn);

  auto* st = add("study-ntrain", "error versus number of training parameters", cmd_study_ntrain);
  st->add_option("--problem", o.problem, "adr, monodomain or pulse1d")
      ->required()
      ->check(CLI::IsMember({"adr", "monodomain", "pulse1d"}));
  st->add_option("--config", o.config, "JSON run configuration")->required();
  out_opt(st, "study CSV");
  seed(st);

  auto* be = add("bench", "timing of inference against the full order model", cmd_bench);
  be->add_option("--ckpt", o.ckpt, "checkpoint")->required();
  be->add_option("--basis", o.basis, "basis file")->required();
  be->add_option("--problem", o.problem, "adr, monodomain or pulse1d")
      ->required()
      ->check(CLI::IsMember({"adr", "monodomain", "pulse1d"}));
  be->add_option("--config", o.config, "JSON run configuration")->required();
  be->add_option("--mu", o.mu, "comma separated parameter tuple")->required();
  be->add_option("--reps", o.reps, "repetitions")->default_val(5);
  out_opt(be, "report text file");

  auto* bs = add("bench-svd", "randomized against exact SVD on a synthetic matrix", cmd_bench_svd);
  bs->add_option("--rows", o.rows, "rows")->default_val(256);
  bs->add_option("--cols", o.cols, "columns")->default_val(400);
  bs->add_option("--ranks", o.ranks, "comma separated ranks")->default_val("4,16,64");
  bs->add_option("--oversampling", o.oversampling, "oversampling p")->default_val(8);
  bs->add_option("--power", o.power, "power iterations q")->default_val(2);
  bs->add_option("--reps", o.reps, "repetitions")->default_val(3);
  out_opt(bs, "CSV file");
  seed(bs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out, o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code == 0 ? 0 : 2;
  }

  for (auto& [sub, entry] : commands) {
    if (!sub->parsed()) continue;
    Manifest manifest;
    manifest.command = entry.first;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    int code = 0;
    std::string message;
    try {
      entry.second(o, manifest, out);
    } catch (const InvalidArgument& e) {
      code = 2;
      message = e.what();
    } catch (const FormatError& e) {
      code = 2;
      message = e.what();
    } catch (const std::exception& e) {
      code = 1;
      message = e.what();
    }
    try {
      manifest.write(code == 0 ? "ok" : "error", message, elapsed());
    } catch (const std::exception& e) {
      err << "warning: could not write manifest: " << e.what() << '\n';
    }
    if (code != 0) err << "error: " << message << '\n';
    return code;
  }
  return 2;
}

}  // namespace podlrom::cli
