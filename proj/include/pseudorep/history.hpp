#pragma once

#include <filesystem>
#include <vector>

#include "pseudorep/loop.hpp"
#include "pseudorep/manifest.hpp"

namespace pseudorep {

Json to_json(const AugmentationSpec& a);
AugmentationSpec augmentation_from_json(const Json& j, const AugmentationSpec& base = {});
Json to_json(const MixupSpec& m);
MixupSpec mixup_from_json(const Json& j, const MixupSpec& base = {});

/// Fully expanded config, defaults included.
Json to_json(const LoopConfig& c);
/// `alpha` is required; every other field falls back to `base`. Unknown or
/// ill-typed fields raise ConfigError naming the field path.
LoopConfig loop_config_from_json(const Json& j, const LoopConfig& base = {});

Json to_json(const IterationMetrics& m);
IterationMetrics iteration_metrics_from_json(const Json& j);

/// Summary fields without the per-iteration records.
Json history_summary(const RunHistory& h);

/// One IterationMetrics object per line.
void write_history_jsonl(const std::filesystem::path& path, const RunHistory& h);
std::vector<IterationMetrics> read_history_jsonl(const std::filesystem::path& path);

/// Largest absolute difference between numeric fields of two histories;
/// +inf when their shapes differ.
double history_distance(const std::vector<IterationMetrics>& a,
                        const std::vector<IterationMetrics>& b);

}  // namespace pseudorep
