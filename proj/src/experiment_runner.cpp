#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "pseudorep/errors.hpp"
#include "pseudorep/experiments.hpp"

namespace pseudorep {

namespace {

namespace fs = std::filesystem;

/// Runs `work(i)` for i in [0, n) on up to `jobs` threads; rethrows the first
/// failure after all workers stop.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& work) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (first) std::rethrow_exception(first);
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

Json experiment_manifest(const ExperimentSpec& spec, const Dataset& data,
                         const ExperimentDirOptions& options) {
  Json m{{"kind", "experiment"},
         {"config", to_json(spec)},
         {"dataset_hash", data.content_hash()},
         {"dataset_size", data.size()},
         {"units", plan_units(spec).size()}};
  for (const auto& [k, v] : options.manifest_extra.items()) m[k] = v;
  return m;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs) {
  spec.validate();
  const Dataset data = materialize(spec.dataset);
  const auto units = plan_units(spec);
  std::vector<std::vector<ResultRow>> per_unit(units.size());
  parallel_for(units.size(), jobs, [&](std::size_t i) { per_unit[i] = run_unit(spec, data, units[i]); });
  ExperimentResult result;
  for (auto& rows : per_unit) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  result.summary = summarize(spec, result.rows);
  return result;
}

ExperimentResult run_experiment_dir(const ExperimentSpec& spec, const fs::path& out,
                                    const ExperimentDirOptions& options) {
  spec.validate();
  const bool exists_nonempty = fs::exists(out) && !fs::is_empty(out);
  if (exists_nonempty && !options.resume && !options.force) {
    throw ConfigError(out.string() + " is not empty (use --resume or --force)");
  }
  const Dataset data = materialize(spec.dataset);
  const Json manifest = experiment_manifest(spec, data, options);
  const fs::path unit_dir = out / "units";
  if (options.resume && fs::exists(out / "manifest.json")) {
    std::ifstream in(out / "manifest.json");
    const Json previous = Json::parse(in, nullptr, false);
    if (previous.is_discarded() || previous.value("config", Json()) != manifest.at("config") ||
        previous.value("dataset_hash", std::string()) != manifest.at("dataset_hash")) {
      throw ConfigError(out.string() + ": --resume with a different configuration or dataset");
    }
  }
  if (options.force && !options.resume && fs::exists(unit_dir)) fs::remove_all(unit_dir);
  fs::create_directories(unit_dir);
  write_text(out / kPartialMarker, "");
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  const auto units = plan_units(spec);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!(options.resume && fs::exists(unit_dir / (units[i].key() + ".csv")))) pending.push_back(i);
  }
  parallel_for(pending.size(), options.jobs, [&](std::size_t p) {
    const auto& unit = units[pending[p]];
    const auto rows = run_unit(spec, data, unit);
    const fs::path path = unit_dir / (unit.key() + ".csv");
    const fs::path tmp = path.string() + ".tmp";
    write_results_csv(tmp, rows);
    fs::rename(tmp, path);
  });

  ExperimentResult result;
  for (const auto& unit : units) {
    const auto rows = read_results_csv(unit_dir / (unit.key() + ".csv"));
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.summary = summarize(spec, result.rows);
  write_results_csv(out / "results.csv", result.rows);
  write_text(out / "summary.json", result.summary.dump(2) + "\n");
  Json final_manifest = manifest;
  final_manifest["completed_units"] = units.size();
  final_manifest["resumed_units"] = units.size() - pending.size();
  write_text(out / "manifest.json", final_manifest.dump(2) + "\n");
  fs::remove(out / kPartialMarker);
  return result;
}

}  // namespace pseudorep
