#include "pseudorep/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pseudorep/checkpoint.hpp"
#include "pseudorep/errors.hpp"
#include "pseudorep/generators.hpp"
#include "pseudorep/history.hpp"
#include "pseudorep/split.hpp"

namespace pseudorep {

namespace fs = std::filesystem;

Json to_json(const RunSpec& s) { return Json{{"dataset", to_json(s.dataset)}, {"loop", to_json(s.loop)}}; }

RunSpec run_spec_from_json(const Json& j_in) {
  const Json& j = j_in.is_object() && j_in.value("kind", std::string()) == "run" && j_in.contains("config")
                      ? j_in.at("config")
                      : j_in;
  if (!j.is_object()) throw ConfigError("run config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "dataset" && key != "loop") throw ConfigError(key + ": unknown field");
  }
  if (!j.contains("loop")) throw ConfigError("loop: missing required field");
  RunSpec s;
  if (j.contains("dataset")) s.dataset = dataset_spec_from_json(j.at("dataset"));
  try {
    s.loop = loop_config_from_json(j.at("loop"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("loop.") + e.what());
  }
  return s;
}

Split run_split(const RunSpec& spec, const Dataset& data) {
  return make_split(data, {spec.dataset.n_labeled, spec.dataset.n_test,
                           derive_seed(derive_seed(spec.dataset.seed, "split"), spec.loop.seed), true});
}

Json interpretation_flags(const RunSpec& spec) {
  return Json{
      {"n_per_class", spec.loop.n_per_class ? "configured" : "initial seed labels / num_classes"},
      {"validation", "stratified holdout of the seed labels before augmentation"},
      {"confidence_model", "fused head M_w"},
      {"supervised_baseline", "iteration-0 M_l"},
      {"best_checkpoint", spec.loop.validation_fraction > 0.0 ? "highest validation accuracy"
                                                              : "last iteration"},
      {"split_seed", "derive(derive(dataset.seed, split), loop.seed)"}};
}

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PSEUDOREP_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto s = std::stoull(v, &pos);
    if (pos != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string("PSEUDOREP_SEED: not an unsigned integer: '") + v + "'");
  }
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void prepare_out(const fs::path& out, bool force) {
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw ConfigError(out.string() + " is not empty (use --force)");
    fs::remove_all(out);
  }
  fs::create_directories(out);
}

struct GenArgs {
  std::string name;
  std::size_t n_per_class = 100;
  std::size_t size = 16;
  int classes = 0;
  double difficulty = 0.5;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
};

void cmd_gen(const GenArgs& a, std::ostream& os) {
  DatasetSpec spec;
  spec.generator = a.name;
  spec.n_per_class = a.n_per_class;
  spec.size = a.size;
  spec.difficulty = a.difficulty;
  spec.seed = a.seed ? *a.seed : env_seed().value_or(0);
  if (a.name == "synthetic") {
    spec.num_classes = a.classes ? a.classes : 7;
  } else if (a.name == "signals") {
    spec.num_classes = a.classes ? a.classes : 5;
  } else if (a.name == "crack") {
    spec.num_classes = 3;
  } else {
    throw ConfigError("--name: unknown generator '" + a.name + "' (crack, synthetic, signals)");
  }
  const Dataset data = materialize(spec);
  prepare_out(a.out, a.force);
  DatasetManifest m;
  m.name = a.name;
  m.generator = a.name;
  m.seed = spec.seed;
  Json params = to_json(spec);
  params.erase("path");
  params.erase("n_labeled");
  params.erase("n_test");
  params["tool_version"] = kToolVersion;
  m.params = params;
  write_dataset_dir(a.out, data, m);
  os << "wrote " << data.size() << " samples to " << a.out << " (hash " << data.content_hash() << ")\n";
}

struct RunArgs {
  std::string config;
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iterations;
  std::optional<double> alpha;
};

void cmd_run(const RunArgs& a, std::ostream& os) {
  const Json raw = read_json_file(a.config);
  RunSpec spec = run_spec_from_json(raw);
  const Json& cfg = raw.value("kind", std::string()) == "run" ? raw.at("config") : raw;
  if (a.seed) {
    spec.loop.seed = *a.seed;
  } else if (!cfg.at("loop").contains("seed")) {
    if (auto s = env_seed()) spec.loop.seed = *s;
  }
  if (a.max_iterations) spec.loop.max_iterations = *a.max_iterations;
  if (a.alpha) spec.loop.alpha = *a.alpha;
  spec.loop.validate();

  const std::string started = now_utc();
  const Dataset data = materialize(spec.dataset);
  const Split split = run_split(spec, data);
  prepare_out(a.out, a.force);
  Json manifest{{"kind", "run"},
                {"tool_version", kToolVersion},
                {"config", to_json(spec)},
                {"dataset_hash", data.content_hash()},
                {"seeds", {{"dataset", spec.dataset.seed}, {"loop", spec.loop.seed}}},
                {"interpretation", interpretation_flags(spec)},
                {"started_at", started}};
  write_json_file(fs::path(a.out) / "manifest.json", manifest);

  const RunResult r =
      run_loop(LoopInput{split.labeled, split.unlabeled, split.test, split.unlabeled_truth}, spec.loop);
  write_history_jsonl(fs::path(a.out) / "history.jsonl", r.history);
  if (r.best_models) {
    CheckpointBundle b;
    b.metadata = Json{{"config", to_json(spec)},
                      {"best_iteration", r.history.best_iteration},
                      {"metrics", to_json(r.history.best())}};
    b.classifiers.emplace_back("m_l", r.best_models->m_l);
    b.classifiers.emplace_back("m_w", r.best_models->m_w);
    if (r.m_u) b.representations.emplace_back("m_u", *r.m_u);
    write_checkpoint(fs::path(a.out) / "best.ckpt", b);
  }
  manifest["finished_at"] = now_utc();
  manifest["result"] = history_summary(r.history);
  manifest["warnings"] = r.warnings;
  write_json_file(fs::path(a.out) / "manifest.json", manifest);

  const auto& best = r.history.best();
  os << "iterations " << r.history.records.size() << ", stop " << r.history.stop_reason << "\n"
     << "baseline test accuracy " << r.history.baseline_accuracy() << "\n"
     << "best iteration " << r.history.best_iteration << ", test accuracy " << best.test_accuracy
     << "\n";
}

struct ExperimentArgs {
  std::string id;
  std::string config;
  std::string out;
  std::size_t jobs = 1;
  bool resume = false;
  bool force = false;
  std::vector<double> alphas;
  std::vector<double> grid;
  std::vector<std::string> layers;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> max_iterations;
};

void cmd_experiment(const ExperimentArgs& a, std::ostream& os) {
  Json j = a.config.empty() ? Json::object() : read_json_file(a.config);
  if (!j.is_object()) throw ConfigError("experiment config must be an object");
  if (j.contains("experiment") && j.at("experiment") != a.id) {
    throw ConfigError("experiment: config names '" + j.at("experiment").dump() +
                      "' but the command line names '" + a.id + "'");
  }
  j["experiment"] = a.id;
  if (!a.alphas.empty()) j["grid"] = a.alphas;
  if (!a.grid.empty()) j["grid"] = a.grid;
  if (!a.layers.empty()) j["layers"] = a.layers;
  if (!a.seeds.empty()) j["seeds"] = a.seeds;
  if (!(j.contains("dataset") && j.at("dataset").contains("seed"))) {
    if (auto s = env_seed()) j["dataset"]["seed"] = *s;
  }
  if (a.max_iterations) {
    if (!j.contains("loop")) j["loop"] = Json::object();
    j["loop"]["max_iterations"] = *a.max_iterations;
  }
  const ExperimentSpec spec = experiment_spec_from_json(j);
  ExperimentDirOptions opts;
  opts.jobs = a.jobs;
  opts.resume = a.resume;
  opts.force = a.force;
  opts.manifest_extra = Json{{"tool_version", kToolVersion}, {"started_at", now_utc()}};
  const auto result = run_experiment_dir(spec, a.out, opts);
  os << "wrote " << result.rows.size() << " rows to " << (fs::path(a.out) / "results.csv").string()
     << "\n"
     << result.summary.dump(2) << "\n";
}

void cmd_inspect(const std::string& path, std::ostream& os) {
  const fs::path p(path);
  if (fs::is_regular_file(p)) {
    os << read_checkpoint_header(p).dump(2) << "\n";
    return;
  }
  if (!fs::exists(p / "manifest.json")) throw InputError(path + ": no manifest.json");
  std::ifstream in(p / "manifest.json");
  os << Json::parse(in).dump(2) << "\n";
  if (fs::exists(p / "history.jsonl")) {
    os << "iter labeled unlabeled added test_acc supervised_acc val_acc\n";
    for (const auto& m : read_history_jsonl(p / "history.jsonl")) {
      os << m.iteration << ' ' << m.labeled_size << ' ' << m.unlabeled_size << ' ' << m.added << ' '
         << m.test_accuracy << ' ' << m.supervised_test_accuracy << ' ';
      if (m.validation_accuracy) {
        os << *m.validation_accuracy;
      } else {
        os << '-';
      }
      os << "\n";
    }
  }
  if (fs::exists(p / "summary.json")) {
    std::ifstream s(p / "summary.json");
    os << Json::parse(s).dump(2) << "\n";
  }
  if (fs::exists(p / kPartialMarker)) os << "partial: some units have not finished\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pseudo-representation labeling: semi-supervised self-training"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset directory");
  g->add_option("--name", gen.name, "crack, synthetic or signals")->required();
  g->add_option("--n-per-class", gen.n_per_class, "Samples per class");
  g->add_option("--size", gen.size, "Image side or signal length");
  g->add_option("--classes", gen.classes, "Number of classes (synthetic, signals)");
  g->add_option("--difficulty", gen.difficulty, "Noise level in (0, 1]");
  g->add_option("--seed", gen.seed, "Generator seed (default: PSEUDOREP_SEED or 0)");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_flag("--force", gen.force, "Overwrite a non-empty output directory");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run the pseudo-labeling loop from a config or manifest");
  r->add_option("--config", run.config, "JSON run config or run manifest")->required();
  r->add_option("--out", run.out, "Output directory")->required();
  r->add_flag("--force", run.force, "Overwrite a non-empty output directory");
  r->add_option("--seed", run.seed, "Loop seed override");
  r->add_option("--max-iterations", run.max_iterations, "Maximum number of selection rounds");
  r->add_option("--alpha", run.alpha, "Selection rate");

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run an experiment grid");
  e->add_option("id", exp.id, "noise_curve, confidence_curve, alpha_sweep, ssl_ablation, "
                              "mixup_layer_ablation or benchmark")
      ->required();
  e->add_option("--config", exp.config, "JSON experiment config");
  e->add_option("--out", exp.out, "Output directory")->required();
  e->add_option("--jobs", exp.jobs, "Grid points run concurrently")->check(CLI::PositiveNumber);
  e->add_flag("--resume", exp.resume, "Skip grid points that already finished");
  e->add_flag("--force", exp.force, "Write into a non-empty output directory");
  e->add_option("--alphas", exp.alphas, "Alpha grid")->delimiter(',');
  e->add_option("--grid", exp.grid, "Grid values (noise rates or alphas)")->delimiter(',');
  e->add_option("--layers", exp.layers, "Mixup settings")->delimiter(',');
  e->add_option("--seeds", exp.seeds, "Seeds")->delimiter(',');
  e->add_option("--max-iterations", exp.max_iterations, "Loop max_iterations override");

  std::string inspect_path;
  auto* i = app.add_subcommand("inspect", "Print the manifest and history of a run directory");
  i->add_option("path", inspect_path, "Run, experiment or dataset directory, or a checkpoint")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) {
      cmd_gen(gen, out);
    } else if (r->parsed()) {
      cmd_run(run, out);
    } else if (e->parsed()) {
      cmd_experiment(exp, out);
    } else if (i->parsed()) {
      cmd_inspect(inspect_path, out);
    }
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace pseudorep
