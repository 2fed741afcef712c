#include "mhi/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mhi/metrics.hpp"
#include "mhi/pipeline.hpp"

namespace mhi {

namespace fs = std::filesystem;

namespace {

constexpr int kReportVersion = 1;
constexpr int kConfigFormatVersion = 1;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string PipelineConfig::display_name() const {
  if (!name.empty()) return name;
  std::ostringstream os;
  os << 'N' << normals << "-D" << distances << '-' << to_string(scheme);
  if (estimator.mode == EstimatorMode::softmin) os << "-softmin";
  return os.str();
}

void PipelineConfig::validate() const {
  if (normals < 1 || normals > 5) throw InvariantViolation("normals must be between 1 and 5");
  if (distances < 2) throw InvariantViolation("distances must be at least 2");
  if (!(near_depth > 0.0) || !(far_depth > near_depth))
    throw InvariantViolation("depth range must satisfy 0 < near < far");
  if (estimator.mode == EstimatorMode::softmin && !(estimator.tau > 0.0))
    throw InvariantViolation("softmin tau must be positive");
}

PipelineConfig pipeline_config_from_json(const Json& j, std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + " must be an object");
  PipelineConfig c;
  const std::string w(where);
  if (j.contains("name")) c.name = require(j, "name", where).get<std::string>();
  if (j.contains("normals")) c.normals = require_int(j, "normals", where);
  if (j.contains("distances")) c.distances = require_int(j, "distances", where);
  if (j.contains("near_depth")) c.near_depth = require_number(j, "near_depth", where);
  if (j.contains("far_depth")) c.far_depth = require_number(j, "far_depth", where);
  if (j.contains("scheme")) {
    const Json& s = j["scheme"];
    if (!s.is_string()) throw FormatError("field " + w + ".scheme must be a string");
    c.scheme = parse_blend_scheme(s.get<std::string>());
  }
  if (j.contains("soft_sharpness")) c.soft_sharpness = require_number(j, "soft_sharpness", where);
  if (j.contains("estimator")) {
    const Json& e = j["estimator"];
    const std::string ew = w + ".estimator";
    if (e.contains("mode")) {
      if (!e["mode"].is_string()) throw FormatError("field " + ew + ".mode must be a string");
      c.estimator.mode = parse_estimator_mode(e["mode"].get<std::string>());
    }
    if (e.contains("tau")) c.estimator.tau = require_number(e, "tau", ew);
    if (e.contains("dilation_radius")) c.estimator.dilation_radius = require_int(e, "dilation_radius", ew);
  }
  try {
    c.validate();
  } catch (const InvariantViolation& err) {
    throw FormatError(w + ": " + err.what());
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  return {{"name", c.display_name()},
          {"normals", c.normals},
          {"distances", c.distances},
          {"near_depth", c.near_depth},
          {"far_depth", c.far_depth},
          {"scheme", std::string(to_string(c.scheme))},
          {"soft_sharpness", c.soft_sharpness},
          {"estimator",
           {{"mode", std::string(to_string(c.estimator.mode))},
            {"tau", c.estimator.tau},
            {"dilation_radius", c.estimator.dilation_radius}}}};
}

std::vector<PipelineConfig> pipeline_configs_from_json(const Json& j) {
  check_format_version(j, kConfigFormatVersion, "config");
  std::vector<PipelineConfig> out;
  if (j.contains("configs")) {
    const Json& list = j["configs"];
    if (!list.is_array()) throw FormatError("field config.configs must be an array");
    for (std::size_t k = 0; k < list.size(); ++k)
      out.push_back(pipeline_config_from_json(list[k], "config.configs[" + std::to_string(k) + "]"));
  } else {
    out.push_back(pipeline_config_from_json(j, "config"));
  }
  return out;
}

const AggregateRow* MetricReport::find(std::string_view config, RotationBin bin) const {
  for (const AggregateRow& r : aggregates)
    if (r.config == config && r.bin == bin) return &r;
  return nullptr;
}

double MetricReport::overall_psnr(std::string_view config) const {
  double sum = 0.0;
  int n = 0;
  for (const SampleResult& s : samples)
    if (s.config == config && s.error.empty() && !s.identical) {
      sum += s.psnr;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

namespace {

using EstimatorKey = std::tuple<int, int, double, double, int, double, int>;

EstimatorKey estimator_key(const PipelineConfig& c) {
  return {c.normals, c.distances, c.near_depth, c.far_depth, static_cast<int>(c.estimator.mode),
          c.estimator.mode == EstimatorMode::softmin ? c.estimator.tau : 0.0,
          c.estimator.dilation_radius};
}

}  // namespace

MetricReport run_benchmark(const std::vector<SceneSample>& suite,
                           const std::vector<PipelineConfig>& configs) {
  MetricReport report;
  report.configs = configs;
  report.suite_size = suite.size();
  for (const auto& c : configs) c.validate();
  if (suite.empty()) report.warnings.push_back("suite contains no samples");
  if (configs.empty()) report.warnings.push_back("no pipeline configurations given");

  // Configurations that differ only in blending share one estimated MHI.
  std::map<EstimatorKey, int> estimator_slot;
  std::vector<int> slot_of_config(configs.size());
  std::vector<const PipelineConfig*> slot_config;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto key = estimator_key(configs[c]);
    auto [it, inserted] = estimator_slot.emplace(key, static_cast<int>(slot_config.size()));
    if (inserted) slot_config.push_back(&configs[c]);
    slot_of_config[c] = it->second;
  }

  const std::size_t n = suite.size();
  std::vector<SampleResult> results(configs.size() * n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < static_cast<int>(n); ++s) {
    const SceneSample& sample = suite[s];
    for (std::size_t slot = 0; slot < slot_config.size(); ++slot) {
      const PipelineConfig& est_cfg = *slot_config[slot];
      std::string est_error;
      std::optional<AlphaEstimate> estimate;
      try {
        const MhiConfig mcfg = default_config(sample.input.ref_cam, est_cfg.near_depth,
                                              est_cfg.far_depth, est_cfg.normals, est_cfg.distances);
        estimate = estimate_mhi(sample.input, mcfg, est_cfg.estimator);
      } catch (const std::exception& e) {
        est_error = e.what();
      }
      for (std::size_t c = 0; c < configs.size(); ++c) {
        if (slot_of_config[c] != static_cast<int>(slot)) continue;
        SampleResult& r = results[c * n + s];
        r.config = configs[c].display_name();
        r.sample_id = sample.id;
        r.bin = sample.bin;
        if (!est_error.empty()) {
          r.error = est_error;
          continue;
        }
        try {
          double psnr_sum = 0.0, ssim_sum = 0.0, l1_sum = 0.0, valid_sum = 0.0, rot = 0.0;
          bool identical = true;
          bool extrapolation = false;
          for (const TargetView& tv : sample.targets) {
            const RenderedView view =
                render_view(estimate->mhi, RenderRequest{tv.intrinsics, tv.pose},
                            ViewOptions{configs[c].scheme, configs[c].soft_sharpness,
                                        BlendNormalization::coverage});
            const PsnrResult p = psnr(view.image, tv.ground_truth, tv.valid);
            identical = identical && p.identical;
            if (!p.identical) psnr_sum += p.db;
            ssim_sum += ssim(view.image, tv.ground_truth, tv.valid);
            l1_sum += l1(view.image, tv.ground_truth, tv.valid);
            valid_sum += static_cast<double>(tv.valid.count()) /
                         (static_cast<double>(tv.valid.width()) * tv.valid.height());
            rot = std::max(rot, tv.rotation_deg);
            extrapolation = extrapolation || tv.extrapolation;
          }
          const double k = static_cast<double>(std::max<std::size_t>(1, sample.targets.size()));
          r.psnr = psnr_sum / k;
          r.identical = identical && !sample.targets.empty();
          r.ssim = ssim_sum / k;
          r.l1 = l1_sum / k;
          r.valid_fraction = valid_sum / k;
          r.rotation_deg = rot;
          r.extrapolation = extrapolation;
        } catch (const std::exception& e) {
          r.error = e.what();
        }
      }
    }
  }
  report.samples = std::move(results);

  for (const PipelineConfig& cfg : configs) {
    const std::string name = cfg.display_name();
    for (RotationBin bin : kRotationBins) {
      AggregateRow row;
      row.config = name;
      row.bin = bin;
      int psnr_n = 0;
      for (const SampleResult& r : report.samples) {
        if (r.config != name || r.bin != bin) continue;
        if (!r.error.empty()) {
          ++row.failures;
          continue;
        }
        ++row.samples;
        if (!r.identical) {
          row.psnr += r.psnr;
          ++psnr_n;
        }
        row.ssim += r.ssim;
        row.l1 += r.l1;
        row.valid_fraction += r.valid_fraction;
      }
      if (psnr_n > 0) row.psnr /= psnr_n;
      if (row.samples > 0) {
        row.ssim /= row.samples;
        row.l1 /= row.samples;
        row.valid_fraction /= row.samples;
      }
      report.aggregates.push_back(row);
    }
  }
  for (const SampleResult& r : report.samples)
    if (!r.error.empty()) report.warnings.push_back(r.config + "/" + r.sample_id + ": " + r.error);
  return report;
}

Json report_to_json(const MetricReport& report) {
  Json configs = Json::array();
  for (const auto& c : report.configs) configs.push_back(to_json(c));
  Json samples = Json::array();
  for (const SampleResult& r : report.samples) {
    Json s = {{"config", r.config},
              {"sample", r.sample_id},
              {"bin", std::string(to_string(r.bin))},
              {"rotation_deg", r.rotation_deg},
              {"kind", r.extrapolation ? "extrapolation" : "interpolation"},
              {"identical", r.identical},
              {"ssim", r.ssim},
              {"l1", r.l1},
              {"valid_fraction", r.valid_fraction}};
    s["psnr"] = r.identical ? Json(nullptr) : Json(r.psnr);
    if (!r.error.empty()) s["error"] = r.error;
    samples.push_back(std::move(s));
  }
  Json aggregates = Json::array();
  for (const AggregateRow& a : report.aggregates)
    aggregates.push_back({{"config", a.config},
                          {"bin", std::string(to_string(a.bin))},
                          {"samples", a.samples},
                          {"failures", a.failures},
                          {"psnr", a.psnr},
                          {"ssim", a.ssim},
                          {"l1", a.l1},
                          {"valid_fraction", a.valid_fraction}});
  return {{"report_version", kReportVersion},
          {"suite_samples", report.suite_size},
          {"configs", configs},
          {"aggregates", aggregates},
          {"samples", samples},
          {"warnings", report.warnings}};
}

std::string report_table(const MetricReport& report) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-5s %4s %8s %7s %7s %6s\n", "config", "bin", "n", "PSNR",
                "SSIM", "L1", "valid");
  os << line;
  for (const AggregateRow& a : report.aggregates) {
    std::snprintf(line, sizeof line, "%-28s %-5s %4d %8.3f %7.4f %7.4f %6.3f\n", a.config.c_str(),
                  std::string(to_string(a.bin)).c_str(), a.samples, a.psnr, a.ssim, a.l1,
                  a.valid_fraction);
    os << line;
  }
  for (const std::string& w : report.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string report_svg(const MetricReport& report) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 170, kTop = 20, kBottom = 50;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double lo = 1e9, hi = -1e9;
  for (const SampleResult& r : report.samples)
    if (r.error.empty() && !r.identical) {
      lo = std::min(lo, r.psnr);
      hi = std::max(hi, r.psnr);
    }
  if (lo > hi) {
    lo = 0.0;
    hi = 50.0;
  }
  lo = std::floor(lo - 1.0);
  hi = std::ceil(hi + 1.0);
  auto px = [&](double deg) { return kLeft + (kW - kLeft - kRight) * deg / 8.0; };
  auto py = [&](double db) { return kH - kBottom - (kH - kTop - kBottom) * (db - lo) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py(lo) << "\" x2=\"" << px(8) << "\" y2=\"" << py(lo)
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << py(lo) << "\" x2=\"" << kLeft << "\" y2=\"" << py(hi)
     << "\" stroke=\"black\"/>\n";
  for (int d = 0; d <= 8; d += 2)
    os << "<text x=\"" << px(d) << "\" y=\"" << kH - kBottom + 15 << "\" text-anchor=\"middle\">" << d
       << "</text>\n";
  os << "<text x=\"" << px(4) << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\">rotation (deg)</text>\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double db = lo + (hi - lo) * t / ticks;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.1f", py(db) + 4)
       << "\" text-anchor=\"end\">" << fmt("%.1f", db) << "</text>\n";
  }
  os << "<text x=\"14\" y=\"" << py((lo + hi) / 2) << "\" transform=\"rotate(-90 14 "
     << py((lo + hi) / 2) << ")\" text-anchor=\"middle\">PSNR (dB)</text>\n";

  for (std::size_t c = 0; c < report.configs.size(); ++c) {
    const std::string name = report.configs[c].display_name();
    const char* color = kPalette[c % std::size(kPalette)];
    for (const SampleResult& r : report.samples)
      if (r.config == name && r.error.empty() && !r.identical)
        os << "<circle cx=\"" << fmt("%.2f", px(r.rotation_deg)) << "\" cy=\""
           << fmt("%.2f", py(r.psnr)) << "\" r=\"2\" fill=\"" << color
           << "\" fill-opacity=\"0.4\"/>\n";
    std::ostringstream pts;
    for (RotationBin bin : kRotationBins) {
      const AggregateRow* row = report.find(name, bin);
      if (!row || row->samples == 0) continue;
      const auto [blo, bhi] = bin_bounds(bin);
      pts << fmt("%.2f", px(0.5 * (blo + bhi))) << ',' << fmt("%.2f", py(row->psnr)) << ' ';
    }
    os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 16.0 * c + 10;
    os << "<rect x=\"" << kW - kRight + 15 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\""
       << color << "\"/>\n";
    os << "<text x=\"" << kW - kRight + 30 << "\" y=\"" << ly << "\">" << name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_report(const MetricReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_json_file(dir / "report.json", report_to_json(report));
  std::ofstream(dir / "report.txt", std::ios::binary) << report_table(report);
  std::ofstream(dir / "psnr_vs_rotation.svg", std::ios::binary) << report_svg(report);
}

}  // namespace mhi
