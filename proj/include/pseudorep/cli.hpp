#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "pseudorep/experiments.hpp"
#include "pseudorep/loop.hpp"
#include "pseudorep/manifest.hpp"
#include "pseudorep/split.hpp"

namespace pseudorep {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Config of the `run` command: where the data comes from and the loop.
/// The split draws dataset.n_labeled seed labels and dataset.n_test test
/// samples; everything else is unlabeled.
struct RunSpec {
  DatasetSpec dataset;
  LoopConfig loop;
};

Json to_json(const RunSpec& s);
/// Accepts either a run config or a run manifest (its "config" field).
RunSpec run_spec_from_json(const Json& j);

/// Split used by `run` for a given spec.
Split run_split(const RunSpec& spec, const Dataset& data);

/// Fields recorded next to every run so the run can be repeated from the
/// manifest alone.
Json interpretation_flags(const RunSpec& spec);

/// Parses and executes one command line (args exclude the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pseudorep
