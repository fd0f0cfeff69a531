#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coulomb/checkpoint.hpp"
#include "coulomb/error.hpp"
#include "coulomb/field.hpp"
#include "coulomb/io.hpp"
#include "coulomb/kernel.hpp"
#include "coulomb/mixture.hpp"
#include "coulomb/parallel.hpp"
#include "coulomb/particle_flow.hpp"
#include "coulomb/simd/dispatch.hpp"
#include "coulomb/trainer.hpp"

#ifndef COULOMB_VERSION
#define COULOMB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coulomb;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDiverged = 2, kIo = 3 };

// Loads --config. A run manifest is accepted too; its "config" member is used.
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json doc = read_json_file(path);
  if (doc.is_object() && doc.contains("subcommand") && doc.contains("config")) doc = doc.at("config");
  if (!doc.is_object()) throw InputError("config file must hold a JSON object");
  return doc;
}

// Objects merge key by key; any other value replaces the default.
void merge_into(json& base, const json& overlay) {
  for (const auto& [key, value] : overlay.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object())
      merge_into(base[key], value);
    else
      base[key] = value;
  }
}

class Run {
 public:
  Run(std::string subcommand, std::string out_dir)
      : subcommand_(std::move(subcommand)), out_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {
    if (!out_.empty()) {
      std::error_code ec;
      fs::create_directories(out_, ec);
      if (ec) throw IoError("cannot create output directory " + out_.string() + ": " + ec.message());
    }
  }

  bool has_out() const { return !out_.empty(); }

  void write(const std::string& name, std::string_view content) {
    write_file_atomic(out_ / name, content);
    artifacts_.push_back(name);
  }

  void save_net(const std::string& name, const Mlp& net, const AdamState& adam) {
    save_checkpoint(out_ / name, net, adam);
    artifacts_.push_back(name);
  }

  void finish(const json& config, std::optional<std::uint64_t> seed) {
    if (out_.empty()) return;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest{{"subcommand", subcommand_},
                  {"config", config},
                  {"seed", seed ? json(*seed) : json(nullptr)},
                  {"artifacts", artifacts_},
                  {"tool_version", COULOMB_VERSION},
                  {"threads", thread_count()},
                  {"simd", simd::to_string(simd::active_backend())},
                  {"wall_clock_seconds", seconds}};
    write_file_atomic(out_ / "manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> artifacts_;
};

// Flags registered with CLI11 override the config only when given.
template <typename T>
void override_with(json& config, const char* key, const CLI::Option* opt, const T& value) {
  if (opt->count() > 0) config[key] = value;
}

void emit(Run& run, const std::string& name, const std::string& text) {
  if (run.has_out())
    run.write(name, text);
  else
    std::cout << text;
}

// ---------------------------------------------------------------- kernel-table

struct KernelTableArgs {
  std::string config, out, family = "plummer";
  double d = 3.0, epsilon = 1.0, rmax = 5.0;
  int m = 2, steps = 100;
  CLI::Option *o_family, *o_d, *o_eps, *o_m, *o_rmax, *o_steps;
};

int kernel_table(const KernelTableArgs& a) {
  json cfg{{"kernel", {{"family", "plummer"}, {"d", 3.0}, {"epsilon", 1.0}}}, {"m", 2}, {"rmax", 5.0}, {"steps", 100}};
  merge_into(cfg, load_config(a.config));
  reject_unknown_keys(cfg, {"kernel", "m", "rmax", "steps"}, "kernel-table config");
  json& k = cfg["kernel"];
  override_with(k, "family", a.o_family, a.family);
  override_with(k, "d", a.o_d, a.d);
  override_with(k, "epsilon", a.o_eps, a.epsilon);
  override_with(cfg, "m", a.o_m, a.m);
  override_with(cfg, "rmax", a.o_rmax, a.rmax);
  override_with(cfg, "steps", a.o_steps, a.steps);

  const KernelSpec spec = kernel_from_json(k);
  const int m = cfg.at("m").get<int>();
  const double rmax = cfg.at("rmax").get<double>();
  const int steps = cfg.at("steps").get<int>();
  if (m < 1) throw InputError("--m must be >= 1");
  if (!(rmax > 0.0)) throw InputError("--rmax must be positive");
  if (steps < 1) throw InputError("--steps must be >= 1");
  cfg["kernel"] = kernel_to_json(spec);

  Run run("kernel-table", a.out);
  CsvWriter csv({"r", "k", "grad_norm", "laplacian"});
  for (int i = 0; i <= steps; ++i) {
    const double r = rmax * i / steps;
    csv.field(r)
        .field(radial_value(r, spec))
        .field(radial_grad_norm(r, spec))
        .field(radial_laplacian(r, spec, m))
        .end_row();
  }
  emit(run, "kernel_table.csv", csv.text());
  run.finish(cfg, std::nullopt);
  return kOk;
}

// ------------------------------------------------------------------ field-grid

struct FieldGridArgs {
  std::string config, out, batch, family = "plummer";
  double d = 2.0, epsilon = 1.0, xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  int steps = 10;
  CLI::Option *o_batch, *o_family, *o_d, *o_eps, *o_xmin, *o_xmax, *o_ymin, *o_ymax, *o_steps;
};

int field_grid_cmd(const FieldGridArgs& a) {
  json cfg{{"batch", ""},
           {"kernel", {{"family", "plummer"}, {"d", 2.0}, {"epsilon", 1.0}}},
           {"lattice", {{"xmin", -1.0}, {"xmax", 1.0}, {"ymin", -1.0}, {"ymax", 1.0}, {"steps", 10}}}};
  merge_into(cfg, load_config(a.config));
  reject_unknown_keys(cfg, {"batch", "kernel", "lattice"}, "field-grid config");
  override_with(cfg, "batch", a.o_batch, a.batch);
  json& k = cfg["kernel"];
  override_with(k, "family", a.o_family, a.family);
  override_with(k, "d", a.o_d, a.d);
  override_with(k, "epsilon", a.o_eps, a.epsilon);
  json& l = cfg["lattice"];
  reject_unknown_keys(l, {"xmin", "xmax", "ymin", "ymax", "steps"}, "lattice");
  override_with(l, "xmin", a.o_xmin, a.xmin);
  override_with(l, "xmax", a.o_xmax, a.xmax);
  override_with(l, "ymin", a.o_ymin, a.ymin);
  override_with(l, "ymax", a.o_ymax, a.ymax);
  override_with(l, "steps", a.o_steps, a.steps);

  const auto batch_path = cfg.at("batch").get<std::string>();
  if (batch_path.empty()) throw InputError("field-grid needs --batch");
  const KernelSpec spec = kernel_from_json(k);
  Lattice2D lattice{l.at("xmin").get<double>(), l.at("xmax").get<double>(), l.at("ymin").get<double>(),
                    l.at("ymax").get<double>(), l.at("steps").get<int>()};
  cfg["kernel"] = kernel_to_json(spec);

  Run run("field-grid", a.out);
  const Batch batch = read_batch_csv(batch_path);
  const auto samples = field_grid(batch, spec, lattice);
  CsvWriter csv({"gx", "gy", "phi", "ex", "ey"});
  for (const auto& s : samples)
    csv.field(s.location[0]).field(s.location[1]).field(s.potential).field(s.field[0]).field(s.field[1]).end_row();
  emit(run, "field_grid.csv", csv.text());
  run.finish(cfg, std::nullopt);
  return kOk;
}

// -------------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, out, scenario;
  std::uint64_t seed = 0;
  long steps = 0, snapshot_every = 0;
  double step_size = 0.0;
  CLI::Option *o_scenario, *o_seed, *o_steps, *o_snap, *o_step_size;
};

int simulate_cmd(const SimulateArgs& a) {
  json cfg{{"scenario", "two-mode-escape"}, {"seed", 0}};
  merge_into(cfg, load_config(a.config));
  reject_unknown_keys(cfg, {"scenario", "seed"}, "simulate config");
  override_with(cfg, "seed", a.o_seed, a.seed);
  if (a.o_scenario->count() > 0) {
    // A path to a JSON file or a built-in scenario name.
    if (a.scenario.ends_with(".json"))
      cfg["scenario"] = read_json_file(a.scenario);
    else
      cfg["scenario"] = a.scenario;
  }
  Scenario sc = cfg.at("scenario").is_string() ? named_scenario(cfg.at("scenario").get<std::string>())
                                               : scenario_from_json(cfg.at("scenario"));
  if (a.o_steps->count() > 0) sc.steps = a.steps;
  if (a.o_snap->count() > 0) sc.snapshot_every = a.snapshot_every;
  if (a.o_step_size->count() > 0) sc.step_size = a.step_size;
  sc = scenario_from_json(scenario_to_json(sc));  // validates overrides
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  cfg["scenario"] = scenario_to_json(sc);

  if (a.out.empty()) throw InputError("simulate needs --out");
  Run run("simulate", a.out);
  const SimRun result = run_sim(instantiate(sc, seed), sc.steps, sc.snapshot_every);

  const std::size_t m = result.final_state.batch.dim();
  std::vector<std::string> header{"step", "sample_index"};
  for (std::size_t c = 0; c < m; ++c) header.push_back("x" + std::to_string(c));
  CsvWriter traj(header);
  for (const auto& snap : result.trajectory) {
    for (std::size_t i = 0; i < snap.generated.rows(); ++i) {
      traj.field(snap.step).field(static_cast<long>(i));
      for (double v : snap.generated.row(i)) traj.field(v);
      traj.end_row();
    }
  }
  CsvWriter energy({"step", "energy"});
  const auto& hist = result.final_state.energy_history;
  for (std::size_t s = 0; s < hist.size(); ++s) energy.field(static_cast<long>(s)).field(hist[s]).end_row();
  run.write("trajectory.csv", traj.text());
  run.write("energy.csv", energy.text());
  run.finish(cfg, seed);
  return kOk;
}

// ----------------------------------------------------------------------- train

struct TrainArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  long steps = 0;
  CLI::Option *o_seed, *o_steps;
};

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  CsvWriter csv({"step", "d_loss", "g_loss", "energy", "modes_covered", "high_quality_fraction"});
  for (const auto& r : rows)
    csv.field(r.step)
        .field(r.d_loss)
        .field(r.g_loss)
        .field(r.energy)
        .field(static_cast<long>(r.modes_covered))
        .field(r.high_quality_fraction)
        .end_row();
  return csv.text();
}

int train_cmd(const TrainArgs& a) {
  json raw = load_config(a.config);
  override_with(raw, "seed", a.o_seed, a.seed);
  override_with(raw, "total_steps", a.o_steps, a.steps);
  TrainConfig config = train_config_from_json(raw);
  config.resolve();
  const json cfg = to_json(config);
  if (a.out.empty()) throw InputError("train needs --out");

  Run run("train", a.out);
  auto sampler = make_target_sampler(config);
  TrainHooks hooks;
  hooks.on_eval = [&](const TrainState&, const MetricRow& row, const Matrix& samples) {
    run.write("samples_" + std::to_string(row.step) + ".csv", samples_to_csv(samples));
  };
  try {
    const TrainState state = train(config, *sampler, hooks);
    run.write("metrics.csv", metrics_csv(state.metric_log));
    run.save_net("generator.json", state.generator, state.generator_opt);
    run.save_net("discriminator.json", state.discriminator, state.discriminator_opt);
  } catch (const TrainingDiverged& e) {
    if (const auto& good = e.last_good()) {
      run.write("metrics.csv", metrics_csv(good->metric_log));
      run.save_net("generator.json", good->generator, good->generator_opt);
      run.save_net("discriminator.json", good->discriminator, good->discriminator_opt);
    }
    run.finish(cfg, config.seed);
    throw;
  }
  run.finish(cfg, config.seed);
  return kOk;
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
  std::string config, out, samples, reference, checkpoint, target;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  double radius_sigmas = 3.0;
  int bins = 50;
  std::vector<double> range;
  CLI::Option *o_samples, *o_reference, *o_checkpoint, *o_target, *o_n, *o_seed, *o_radius, *o_bins, *o_range;
};

int eval_cmd(const EvalArgs& a) {
  json cfg{{"samples", ""},
           {"checkpoint", ""},
           {"reference", ""},
           {"target", "grid25"},
           {"n", 10000},
           {"seed", 0},
           {"radius_sigmas", 3.0},
           {"bins", 50},
           {"range", {-25.0, 25.0, -25.0, 25.0}}};
  merge_into(cfg, load_config(a.config));
  reject_unknown_keys(cfg, {"samples", "checkpoint", "reference", "target", "n", "seed", "radius_sigmas", "bins", "range"},
                      "eval config");
  override_with(cfg, "samples", a.o_samples, a.samples);
  override_with(cfg, "checkpoint", a.o_checkpoint, a.checkpoint);
  override_with(cfg, "reference", a.o_reference, a.reference);
  if (a.o_target->count() > 0)
    cfg["target"] = a.target.ends_with(".json") ? read_json_file(a.target) : json(a.target);
  override_with(cfg, "n", a.o_n, a.n);
  override_with(cfg, "seed", a.o_seed, a.seed);
  override_with(cfg, "radius_sigmas", a.o_radius, a.radius_sigmas);
  override_with(cfg, "bins", a.o_bins, a.bins);
  override_with(cfg, "range", a.o_range, a.range);

  const auto samples_path = cfg.at("samples").get<std::string>();
  const auto checkpoint_path = cfg.at("checkpoint").get<std::string>();
  const auto reference_path = cfg.at("reference").get<std::string>();
  if (samples_path.empty() == checkpoint_path.empty())
    throw InputError("eval needs exactly one of --samples or --checkpoint");
  const MixtureSpec target = mixture_from_json(cfg.at("target"));
  const auto n = cfg.at("n").get<std::size_t>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto radius = cfg.at("radius_sigmas").get<double>();
  const auto bins = cfg.at("bins").get<int>();
  const auto range = cfg.at("range").get<std::vector<double>>();
  if (n < 1) throw InputError("--n must be >= 1");
  if (!(radius > 0.0)) throw InputError("--radius-sigmas must be positive");
  if (bins < 2) throw InputError("--bins must be >= 2");
  if (range.size() != 4) throw InputError("--range needs xmin xmax ymin ymax");
  cfg["target"] = mixture_to_json(target);
  if (a.out.empty()) throw InputError("eval needs --out");

  Run run("eval", a.out);
  Matrix samples;
  if (!samples_path.empty()) {
    samples = read_samples_csv(samples_path);
  } else {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    Rng rng = make_rng(seed, Stream::Eval);
    samples = sample_generator(ck.net, n, rng);
  }
  if (samples.rows() == 0) throw DataError("no samples to evaluate");
  if (samples.cols() != target.dim()) throw InputError("samples and target have different dimensions");

  const ModeReport report = assign_modes(samples, target, radius);
  json rep{{"total", report.total},
           {"per_mode_count", report.per_mode_count},
           {"per_mode_std", report.per_mode_std},
           {"unassigned_fraction", report.unassigned_fraction},
           {"modes_covered", report.modes_covered},
           {"high_quality_fraction", report.high_quality_fraction},
           {"radius_sigmas", radius}};
  run.write("mode_report.json", rep.dump(2) + "\n");

  if (samples.cols() == 2) {
    Matrix reference;
    if (!reference_path.empty()) {
      reference = read_samples_csv(reference_path);
    } else {
      Rng rng = make_rng(seed, Stream::Reference);
      reference = sample_mixture(target, n, rng);
    }
    const double jsd = hist2d_jsd(samples, reference, {range[0], range[1], range[2], range[3]}, bins);
    run.write("hist_jsd.txt", format_double(jsd) + "\n");
  }
  run.finish(cfg, seed);
  return kOk;
}

void add_kernel_flags(CLI::App* sub, std::string& family, double& d, double& eps, CLI::Option*& of,
                      CLI::Option*& od, CLI::Option*& oe) {
  of = sub->add_option("--family", family, "Kernel family: plummer or gaussian");
  od = sub->add_option("--d", d, "Kernel dimension exponent d");
  oe = sub->add_option("--epsilon", eps, "Kernel softening epsilon");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Coulomb GAN potential-field tools"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", COULOMB_VERSION);
  int threads = 1;
  std::string simd_name = "auto";
  app.add_option("--threads", threads, "Worker threads (results depend only on this count)")
      ->check(CLI::PositiveNumber);
  app.add_option("--simd", simd_name, "Kernel backend: auto, scalar, avx2 or neon");

  KernelTableArgs kt;
  auto* kt_cmd = app.add_subcommand("kernel-table", "Tabulate k, |grad k| and the Laplacian against r");
  kt_cmd->add_option("--config", kt.config, "JSON config or run manifest");
  kt_cmd->add_option("--out", kt.out, "Output directory (default: CSV on stdout)");
  add_kernel_flags(kt_cmd, kt.family, kt.d, kt.epsilon, kt.o_family, kt.o_d, kt.o_eps);
  kt.o_m = kt_cmd->add_option("--m", kt.m, "Ambient dimension for the Laplacian");
  kt.o_rmax = kt_cmd->add_option("--rmax", kt.rmax, "Largest radius");
  kt.o_steps = kt_cmd->add_option("--steps", kt.steps, "Number of radius intervals");

  FieldGridArgs fg;
  auto* fg_cmd = app.add_subcommand("field-grid", "Potential and field of a batch on a 2-D lattice");
  fg_cmd->add_option("--config", fg.config, "JSON config or run manifest");
  fg_cmd->add_option("--out", fg.out, "Output directory (default: CSV on stdout)");
  fg.o_batch = fg_cmd->add_option("--batch", fg.batch, "Batch CSV (kind,x0,x1)");
  add_kernel_flags(fg_cmd, fg.family, fg.d, fg.epsilon, fg.o_family, fg.o_d, fg.o_eps);
  fg.o_xmin = fg_cmd->add_option("--xmin", fg.xmin);
  fg.o_xmax = fg_cmd->add_option("--xmax", fg.xmax);
  fg.o_ymin = fg_cmd->add_option("--ymin", fg.ymin);
  fg.o_ymax = fg_cmd->add_option("--ymax", fg.ymax);
  fg.o_steps = fg_cmd->add_option("--steps", fg.steps, "Lattice intervals per axis");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Move generated samples along the field");
  sim_cmd->add_option("--config", sim.config, "JSON config or run manifest");
  sim_cmd->add_option("--out", sim.out, "Output directory");
  sim.o_scenario = sim_cmd->add_option("--scenario", sim.scenario,
                                       "two-mode-escape, equalize, single-pair or a scenario .json");
  sim.o_seed = sim_cmd->add_option("--seed", sim.seed);
  sim.o_steps = sim_cmd->add_option("--steps", sim.steps);
  sim.o_step_size = sim_cmd->add_option("--step-size", sim.step_size);
  sim.o_snap = sim_cmd->add_option("--snapshot-every", sim.snapshot_every);

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a generator/discriminator pair on a mixture");
  tr_cmd->add_option("--config", tr.config, "TrainConfig JSON or run manifest");
  tr_cmd->add_option("--out", tr.out, "Output directory");
  tr.o_seed = tr_cmd->add_option("--seed", tr.seed);
  tr.o_steps = tr_cmd->add_option("--steps", tr.steps, "Override total_steps");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Mode coverage and histogram divergence of samples");
  ev_cmd->add_option("--config", ev.config, "JSON config or run manifest");
  ev_cmd->add_option("--out", ev.out, "Output directory");
  ev.o_samples = ev_cmd->add_option("--samples", ev.samples, "Sample CSV to evaluate");
  ev.o_checkpoint = ev_cmd->add_option("--checkpoint", ev.checkpoint, "Generator checkpoint to sample from");
  ev.o_reference = ev_cmd->add_option("--reference", ev.reference, "Reference sample CSV (default: draw from target)");
  ev.o_target = ev_cmd->add_option("--target", ev.target, "grid25 or a mixture .json");
  ev.o_n = ev_cmd->add_option("--n", ev.n, "Samples drawn from a checkpoint or the target");
  ev.o_seed = ev_cmd->add_option("--seed", ev.seed);
  ev.o_radius = ev_cmd->add_option("--radius-sigmas", ev.radius_sigmas);
  ev.o_bins = ev_cmd->add_option("--bins", ev.bins);
  ev.o_range = ev_cmd->add_option("--range", ev.range, "xmin xmax ymin ymax")->expected(4);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kOk;
    const CLI::App* failing = &app;
    for (const auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return kUsage;
  }

  set_thread_count(threads);
  simd::set_active_backend(simd::parse_backend(simd_name));

  if (kt_cmd->parsed()) return kernel_table(kt);
  if (fg_cmd->parsed()) return field_grid_cmd(fg);
  if (sim_cmd->parsed()) return simulate_cmd(sim);
  if (tr_cmd->parsed()) return train_cmd(tr);
  return eval_cmd(ev);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const json::exception& e) {
    std::cerr << "error: bad config value: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
