#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mhi/blending.hpp"
#include "mhi/estimation.hpp"
#include "mhi/json_io.hpp"
#include "mhi/synthscene.hpp"

namespace mhi {

/// One estimation + rendering configuration (a row group of the report).
struct PipelineConfig {
  std::string name;
  int normals = 5;
  int distances = 32;
  double near_depth = 1.0;
  double far_depth = 100.0;
  BlendScheme scheme = BlendScheme::soft;
  double soft_sharpness = 3.0;
  EstimatorOptions estimator;

  /// "N5-D32-soft" style name (plus "-softmin") used when none is given.
  std::string display_name() const;
  void validate() const;
};

/// Parses one configuration object; every field is optional:
/// {"name", "normals", "distances", "near_depth", "far_depth", "scheme",
///  "soft_sharpness", "estimator": {"mode", "tau", "dilation_radius"}}.
PipelineConfig pipeline_config_from_json(const Json& j, std::string_view where);
Json to_json(const PipelineConfig& c);

/// Parses a config file: either {"format_version": 1, "configs": [...]} or a
/// single configuration object carrying "format_version": 1.
std::vector<PipelineConfig> pipeline_configs_from_json(const Json& j);

struct SampleResult {
  std::string config;
  std::string sample_id;
  RotationBin bin = RotationBin::upto2;
  double rotation_deg = 0.0;
  bool extrapolation = false;
  double psnr = 0.0;
  bool identical = false;
  double ssim = 0.0;
  double l1 = 0.0;
  double valid_fraction = 0.0;
  std::string error;  // empty on success
};

struct AggregateRow {
  std::string config;
  RotationBin bin = RotationBin::upto2;
  int samples = 0;  // successful samples
  int failures = 0;
  double psnr = 0.0;  // arithmetic means over successful, non-identical samples
  double ssim = 0.0;
  double l1 = 0.0;
  double valid_fraction = 0.0;
};

struct MetricReport {
  std::vector<PipelineConfig> configs;
  std::size_t suite_size = 0;
  std::vector<SampleResult> samples;  // config-major, then suite order
  std::vector<AggregateRow> aggregates;  // config-major, then bin order
  std::vector<std::string> warnings;

  const AggregateRow* find(std::string_view config, RotationBin bin) const;
  /// Mean PSNR of a config over all bins (sample-weighted).
  double overall_psnr(std::string_view config) const;
};

/// Estimation → rendering → blending for every sample and configuration;
/// metrics are masked to each target's cross-visible pixels. Per-sample
/// failures are recorded, not thrown.
MetricReport run_benchmark(const std::vector<SceneSample>& suite,
                           const std::vector<PipelineConfig>& configs);

Json report_to_json(const MetricReport& report);
std::string report_table(const MetricReport& report);
/// PSNR against target rotation: per-sample points and per-bin means.
std::string report_svg(const MetricReport& report);

/// Writes report.json, report.txt and psnr_vs_rotation.svg into `dir`.
void write_report(const MetricReport& report, const std::filesystem::path& dir);

}  // namespace mhi
