// mhi: estimate, render, orbit, benchmark and serve Multiple Homography Images.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "mhi/bench.hpp"
#include "mhi/estimation.hpp"
#include "mhi/json_io.hpp"
#include "mhi/mhi.hpp"
#include "mhi/pipeline.hpp"
#include "mhi/service.hpp"
#include "mhi/synthscene.hpp"

namespace fs = std::filesystem;
using namespace mhi;

namespace {

constexpr int kUsageError = 2;

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void require_file(const fs::path& p, const char* flag) {
  if (!fs::is_regular_file(p)) throw FormatError(std::string(flag) + ": no such file " + p.string());
}

void require_dir(const fs::path& p, const char* flag) {
  if (!fs::is_directory(p)) throw FormatError(std::string(flag) + ": no such directory " + p.string());
}

std::string size_str(const RgbImage& img) {
  return std::to_string(img.width()) + "x" + std::to_string(img.height());
}

struct EstimateArgs {
  fs::path left, right, cams, config, out;
};

void run_estimate(const EstimateArgs& a) {
  require_file(a.left, "--left");
  require_file(a.right, "--right");
  require_file(a.cams, "--cams");
  require_file(a.config, "--config");
  StereoInput input;
  input.reference = read_rgb_png(a.left);
  input.second = read_rgb_png(a.right);
  if (!input.reference.same_size(input.second))
    throw DimensionMismatch("image sizes differ: left is " + size_str(input.reference) +
                            ", right is " + size_str(input.second));

  const Json cams = read_json_file(a.cams);
  check_format_version(cams, 1, "cams");
  input.ref_cam = intrinsics_from_json(require(cams, "reference", "cams"), "cams.reference");
  input.sec_cam = intrinsics_from_json(require(cams, "second", "cams"), "cams.second");
  input.rel_pose_sec =
      pose_from_json(require(cams, "second_to_reference", "cams"), "cams.second_to_reference");
  input.validate();

  const auto configs = pipeline_configs_from_json(read_json_file(a.config));
  if (configs.size() != 1) throw FormatError("config: estimate takes exactly one configuration");
  const PipelineConfig& c = configs.front();
  const MhiConfig mcfg = default_config(input.ref_cam, c.near_depth, c.far_depth, c.normals, c.distances);
  const AlphaEstimate est = estimate_mhi(input, mcfg, c.estimator);
  save_mhi(est.mhi, a.out);
}

struct RenderArgs {
  fs::path mhi, pose, out, weights_out;
  std::string scheme = "soft";
  double sharpness = 3.0;
};

void run_render(const RenderArgs& a) {
  require_dir(a.mhi, "--mhi");
  require_file(a.pose, "--pose");
  const Mhi mhi = load_mhi(a.mhi);
  const RenderRequest req = view_request_from_json(read_json_file(a.pose), mhi.config().ref_intrinsics);
  const ViewOptions options{parse_blend_scheme(a.scheme), a.sharpness, BlendNormalization::coverage};
  const RenderedView view = render_view(mhi, req, options);
  write_bytes(a.out, encode_png(view.image));
  if (!a.weights_out.empty()) {
    fs::create_directories(a.weights_out);
    for (int i = 0; i < mhi.normal_count(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "weights_%02d.png", i + 1);
      write_bytes(a.weights_out / name, weight_map_png(view, i));
    }
  }
}

struct OrbitArgs {
  fs::path mhi, spec, out;
};

void run_orbit(const OrbitArgs& a) {
  require_dir(a.mhi, "--mhi");
  require_file(a.spec, "--spec");
  const Mhi mhi = load_mhi(a.mhi);
  const OrbitSpec spec = orbit_spec_from_json(read_json_file(a.spec));
  const auto poses = orbit_poses(spec);
  fs::create_directories(a.out);
  const ViewOptions options{spec.scheme, 3.0, BlendNormalization::coverage};
  for (std::size_t k = 0; k < poses.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", k);
    write_bytes(a.out / name,
                render_view_png(mhi, RenderRequest{mhi.config().ref_intrinsics, poses[k]}, options));
  }
}

struct BenchArgs {
  fs::path suite, config, out;
};

void run_bench(const BenchArgs& a) {
  require_dir(a.suite, "--suite");
  require_file(a.config, "--config");
  const auto configs = pipeline_configs_from_json(read_json_file(a.config));
  const auto suite = load_suite(a.suite);
  const MetricReport report = run_benchmark(suite, configs);
  write_report(report, a.out);
  std::cout << report_table(report);
}

struct GenSuiteArgs {
  std::uint64_t seed = 0;
  fs::path out;
  int per_bin = 30;
  double slant_deg = 45.0;
  SuiteOptions options;
};

void run_gen_suite(const GenSuiteArgs& a) {
  const auto suite = generate_suite(a.seed, a.per_bin, a.slant_deg, a.options);
  save_suite(suite, a.out, a.seed, a.slant_deg, a.options);
}

struct ServeArgs {
  fs::path mhi;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void run_serve(const ServeArgs& a) {
  require_dir(a.mhi, "--mhi");
  const RenderService service(load_mhi(a.mhi));
  HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  if (port < 0) throw FormatError("--port: cannot bind " + a.host + ":" + std::to_string(a.port));
  std::cerr << "serving on http://" << a.host << ':' << port << '\n';
  server.listen();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple Homography Image view synthesis"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate an MHI from a rectified stereo pair");
  estimate->add_option("--left", est.left, "Reference image (PNG)")->required();
  estimate->add_option("--right", est.right, "Second image (PNG)")->required();
  estimate->add_option("--cams", est.cams, "Camera JSON")->required();
  estimate->add_option("--config", est.config, "Pipeline config JSON")->required();
  estimate->add_option("--out", est.out, "Output MHI directory")->required();

  RenderArgs ren;
  auto* render = app.add_subcommand("render", "Render a novel view");
  render->add_option("--mhi", ren.mhi, "MHI directory")->required();
  render->add_option("--pose", ren.pose, "Pose JSON")->required();
  render->add_option("--scheme", ren.scheme, "hard | soft | average");
  render->add_option("--sharpness", ren.sharpness, "Soft blending sharpness");
  render->add_option("--out", ren.out, "Output PNG")->required();
  render->add_option("--weights-out", ren.weights_out, "Directory for per-normal weight maps");

  OrbitArgs orb;
  auto* orbit = app.add_subcommand("orbit", "Render frames along a circular path");
  orbit->add_option("--mhi", orb.mhi, "MHI directory")->required();
  orbit->add_option("--spec", orb.spec, "Orbit JSON")->required();
  orbit->add_option("--out", orb.out, "Output frame directory")->required();

  BenchArgs ben;
  auto* bench = app.add_subcommand("bench", "Benchmark pipeline configs on a scene suite");
  bench->add_option("--suite", ben.suite, "Suite directory")->required();
  bench->add_option("--config", ben.config, "Config JSON")->required();
  bench->add_option("--out", ben.out, "Report directory")->required();

  GenSuiteArgs gen;
  auto* gen_suite = app.add_subcommand("gen-suite", "Generate a seeded synthetic scene suite");
  gen_suite->add_option("--seed", gen.seed, "Random seed")->required();
  gen_suite->add_option("--out", gen.out, "Output directory")->required();
  gen_suite->add_option("--per-bin", gen.per_bin, "Samples per rotation bin")->check(CLI::PositiveNumber);
  gen_suite->add_option("--slant", gen.slant_deg, "Maximum plane tilt, degrees")->check(CLI::Range(0.0, 75.0));
  gen_suite->add_option("--orbit-min", gen.options.orbit_radius_min, "Smallest target orbit radius, meters")
      ->check(CLI::PositiveNumber);
  gen_suite->add_option("--orbit-max", gen.options.orbit_radius_max, "Largest target orbit radius, meters")
      ->check(CLI::PositiveNumber);
  gen_suite->add_option("--width", gen.options.width, "Image width")->check(CLI::Range(16, 4096));
  gen_suite->add_option("--height", gen.options.height, "Image height")->check(CLI::Range(16, 4096));

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Serve renders over HTTP");
  serve->add_option("--mhi", srv.mhi, "MHI directory")->required();
  serve->add_option("--host", srv.host, "Bind address");
  serve->add_option("--port", srv.port, "TCP port (0: any free port)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*estimate) run_estimate(est);
    if (*render) run_render(ren);
    if (*orbit) run_orbit(orb);
    if (*bench) run_bench(ben);
    if (*gen_suite) run_gen_suite(gen);
    if (*serve) run_serve(srv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
