#include "mhi/synthscene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "mhi/json_io.hpp"
#include "sampling.hpp"

namespace mhi {

namespace fs = std::filesystem;

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Single-octave value noise over a texel grid, lattice spacing `cell` texels.
std::vector<float> value_noise(int w, int h, double cell, Rng& rng) {
  const int lw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int lh = static_cast<int>(std::ceil(h / cell)) + 2;
  std::vector<float> lattice(static_cast<std::size_t>(lw) * lh * 3);
  for (float& v : lattice) v = static_cast<float>(rng.uniform());
  std::vector<float> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const double gy = (y + 0.5) / cell;
    const int y0 = static_cast<int>(gy);
    const double ty = smoothstep(gy - y0);
    for (int x = 0; x < w; ++x) {
      const double gx = (x + 0.5) / cell;
      const int x0 = static_cast<int>(gx);
      const double tx = smoothstep(gx - x0);
      for (int c = 0; c < 3; ++c) {
        auto at = [&](int xx, int yy) {
          return static_cast<double>(lattice[(static_cast<std::size_t>(yy) * lw + xx) * 3 + c]);
        };
        const double top = at(x0, y0) * (1 - tx) + at(x0 + 1, y0) * tx;
        const double bottom = at(x0, y0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1) * tx;
        out[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<float>(top * (1 - ty) + bottom * ty);
      }
    }
  }
  return out;
}

}  // namespace

RgbImage make_texture(const TextureSpec& spec) {
  if (spec.texels_u < 1 || spec.texels_v < 1 || !(spec.cell_texels > 0.0))
    throw InvariantViolation("texture dimensions must be positive");
  RgbImage tex(spec.texels_u, spec.texels_v);
  if (spec.kind == TextureKind::checkerboard) {
    for (int y = 0; y < spec.texels_v; ++y)
      for (int x = 0; x < spec.texels_u; ++x) {
        const bool odd = (static_cast<long>(std::floor(x / spec.cell_texels)) +
                          static_cast<long>(std::floor(y / spec.cell_texels))) % 2 != 0;
        const auto& col = odd ? spec.color_b : spec.color_a;
        for (int c = 0; c < 3; ++c) tex.at(x, y, c) = col[c];
      }
    return tex;
  }
  Rng rng(spec.seed);
  const auto coarse = value_noise(spec.texels_u, spec.texels_v, spec.cell_texels, rng);
  const auto fine = value_noise(spec.texels_u, spec.texels_v, spec.cell_texels / 2.0, rng);
  auto data = tex.data();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const int c = static_cast<int>(k % 3);
    const double n = 0.7 * coarse[k] + 0.3 * fine[k];
    data[k] = static_cast<float>(spec.color_a[c] + (spec.color_b[c] - spec.color_a[c]) * n);
  }
  return tex;
}

TexturedQuad TexturedQuad::make(const Plane& plane, const Vec3& origin, const Vec3& edge_u,
                                const Vec3& edge_v, const TextureSpec& texture) {
  TexturedQuad q;
  q.plane = plane;
  q.origin = origin;
  q.edge_u = edge_u;
  q.edge_v = edge_v;
  q.texture = texture;
  for (const Vec3& c : q.corners())
    if (std::abs(plane.signed_distance(c)) > 1e-9 * std::max(1.0, c.norm()))
      throw InvariantViolation("quad corner does not lie on its plane");
  if (std::abs(edge_u.dot(edge_v)) > 1e-9 * edge_u.norm() * edge_v.norm())
    throw InvariantViolation("quad edges must be orthogonal");
  q.texels = make_texture(texture);
  return q;
}

std::array<Vec3, 4> TexturedQuad::corners() const {
  return {origin, origin + edge_u, origin + edge_u + edge_v, origin + edge_v};
}

OracleView render_oracle(const PlanarScene& scene, const Intrinsics& cam, const Pose& pose) {
  cam.validate();
  pose.validate(1e-6);
  const int w = cam.width;
  const int h = cam.height;
  OracleView view{RgbImage(w, h), DepthImage(w, h),
                  std::vector<int>(static_cast<std::size_t>(w) * h, -1)};
  const Mat3 k_inv = cam.inverse_matrix();
  const Vec3& center = pose.translation;

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 ray_cam = k_inv * Vec3(x, y, 1.0);  // z = 1, so the ray parameter is depth
      const Vec3 dir = pose.rotation * ray_cam;
      double best = std::numeric_limits<double>::infinity();
      int best_quad = -1;
      double best_s = 0.0, best_t = 0.0;
      for (std::size_t q = 0; q < scene.quads.size(); ++q) {
        const TexturedQuad& quad = scene.quads[q];
        const double denom = quad.plane.normal().dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double lambda = -quad.plane.signed_distance(center) / denom;
        if (!(lambda > 0.0) || lambda >= best) continue;
        const Vec3 rel = center + lambda * dir - quad.origin;
        const double s = rel.dot(quad.edge_u) / quad.edge_u.squaredNorm();
        const double t = rel.dot(quad.edge_v) / quad.edge_v.squaredNorm();
        if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) continue;
        best = lambda;
        best_quad = static_cast<int>(q);
        best_s = s;
        best_t = t;
      }
      float* px = view.image.pixel(x, y);
      if (best_quad < 0) {
        for (int c = 0; c < 3; ++c) px[c] = scene.background[c];
        continue;
      }
      const TexturedQuad& quad = scene.quads[best_quad];
      const int tw = quad.texels.width();
      const int th = quad.texels.height();
      const double tx = std::clamp(best_s * tw - 0.5, 0.0, tw - 1.0);
      const double ty = std::clamp(best_t * th - 0.5, 0.0, th - 1.0);
      detail::BilinearTap tap;
      detail::bilinear_tap(tx, ty, tw, th, tap);
      detail::bilinear_fetch<3, 3>(quad.texels.data().data(), tw, tap, px);
      view.depth.at(x, y) = best;
      view.hit_quad[static_cast<std::size_t>(y) * w + x] = best_quad;
    }
  }
  return view;
}

Mask cross_visible_mask(const OracleView& target, const Intrinsics& tgt_cam, const Pose& tgt_pose,
                        const OracleView& reference, const Intrinsics& ref_cam, double depth_tol) {
  const int w = tgt_cam.width;
  const int h = tgt_cam.height;
  Mask mask(w, h);
  const Mat3 k_inv = tgt_cam.inverse_matrix();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double z = target.depth.at(x, y);
      if (!(z > 0.0)) continue;
      const Vec3 x_ref = tgt_pose.apply(z * (k_inv * Vec3(x, y, 1.0)));
      if (!(x_ref.z() > 0.0)) continue;
      const double u = ref_cam.fx * x_ref.x() / x_ref.z() + ref_cam.cx;
      const double v = ref_cam.fy * x_ref.y() / x_ref.z() + ref_cam.cy;
      detail::BilinearTap tap;
      if (!detail::bilinear_tap(u, v, ref_cam.width, ref_cam.height, tap)) continue;
      bool visible = true;
      for (int yy : {tap.y0, tap.y1})
        for (int xx : {tap.x0, tap.x1}) {
          const double rz = reference.depth.at(xx, yy);
          visible = visible && rz > 0.0 && std::abs(rz - x_ref.z()) <= depth_tol * x_ref.z();
        }
      mask.set(x, y, visible);
    }
  }
  return mask;
}

std::string_view to_string(RotationBin b) {
  switch (b) {
    case RotationBin::upto2: return "0-2";
    case RotationBin::from2to4: return "2-4";
    case RotationBin::from4to8: return "4-8";
  }
  return "0-2";
}

RotationBin parse_rotation_bin(std::string_view s) {
  for (RotationBin b : kRotationBins)
    if (to_string(b) == s) return b;
  throw FormatError("unknown rotation bin '" + std::string(s) + "'");
}

std::pair<double, double> bin_bounds(RotationBin b) {
  switch (b) {
    case RotationBin::upto2: return {0.0, 2.0};
    case RotationBin::from2to4: return {2.0, 4.0};
    case RotationBin::from4to8: return {4.0, 8.0};
  }
  return {0.0, 2.0};
}

RotationBin bin_for_angle(double deg) {
  for (RotationBin b : kRotationBins) {
    const auto [lo, hi] = bin_bounds(b);
    if (deg > lo && deg <= hi) return b;
  }
  throw InvariantViolation("rotation angle " + std::to_string(deg) + " is outside (0, 8] degrees");
}

void quantize_8bit(RgbImage& img) {
  for (float& v : img.data())
    v = static_cast<float>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0) / 255.0);
}

namespace {

Vec3 tilted_normal(double tilt_deg, double azimuth_deg) {
  const double t = tilt_deg * std::numbers::pi / 180.0;
  const double a = azimuth_deg * std::numbers::pi / 180.0;
  return Vec3(std::sin(t) * std::cos(a), std::sin(t) * std::sin(a), std::cos(t)).normalized();
}

// In-plane orthonormal edge directions, u as close to +x as possible.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  Vec3 u = Vec3::UnitX() - Vec3::UnitX().dot(n) * n;
  if (u.norm() < 1e-6) u = Vec3::UnitY() - Vec3::UnitY().dot(n) * n;
  u.normalize();
  return {u, n.cross(u).normalized()};
}

TexturedQuad make_scene_quad(const Vec3& normal, const Vec3& center, double size_u, double size_v,
                             double cell_m, std::uint64_t seed, Rng& rng) {
  const Plane plane = Plane::through_axis_depth(normal, normal.dot(center) / normal.z());
  const auto [eu, ev] = plane_basis(normal);
  // Project the center exactly onto the plane before laying out the corners.
  const Vec3 c = center - plane.signed_distance(center) * normal;
  TextureSpec tex;
  tex.kind = TextureKind::value_noise;
  tex.seed = seed;
  tex.cell_texels = 8.0;
  const double texel_m = cell_m / tex.cell_texels;
  tex.texels_u = std::max(2, static_cast<int>(std::ceil(size_u / texel_m)));
  tex.texels_v = std::max(2, static_cast<int>(std::ceil(size_v / texel_m)));
  for (int ch = 0; ch < 3; ++ch) {
    tex.color_a[ch] = static_cast<float>(rng.uniform(0.02, 0.25));
    tex.color_b[ch] = static_cast<float>(rng.uniform(0.75, 0.98));
  }
  return TexturedQuad::make(plane, c - 0.5 * size_u * eu - 0.5 * size_v * ev, size_u * eu,
                            size_v * ev, tex);
}

}  // namespace

SceneSample generate_sample(std::uint64_t seed, RotationBin bin, bool extrapolate,
                            double slant_range_deg, const SuiteOptions& options) {
  Rng rng(seed);
  const Intrinsics k = Intrinsics::from_hfov(options.width, options.height, options.hfov_deg);
  const double view_w = options.width / k.fx;  // frustum width per meter of depth
  const double view_h = options.height / k.fy;

  SceneSample sample;
  sample.seed = seed;
  sample.bin = bin;

  // Background wall behind everything, large enough for every camera used.
  const double wall_depth = rng.uniform(7.0, 9.0);
  const Vec3 wall_n = tilted_normal(rng.uniform(0.0, std::min(slant_range_deg, 15.0)),
                                    rng.uniform(0.0, 360.0));
  sample.scene.quads.push_back(make_scene_quad(
      wall_n, Vec3(0, 0, wall_depth), 3.0 * view_w * wall_depth, 3.0 * view_h * wall_depth,
      wall_depth * options.texture_cell_px / k.fx, rng.next(), rng));

  const int quad_count = 2 + static_cast<int>(rng.uniform() * 2.0);
  double nearest = wall_depth;
  for (int q = 0; q < quad_count; ++q) {
    for (;;) {
      const double depth = rng.uniform(2.5, 5.0);
      const Vec3 center((rng.uniform() - 0.5) * 0.6 * view_w * depth,
                        (rng.uniform() - 0.5) * 0.6 * view_h * depth, depth);
      const Vec3 n = tilted_normal(rng.uniform(0.0, slant_range_deg), rng.uniform(0.0, 360.0));
      const double size_u = rng.uniform(0.3, 0.5) * view_w * depth;
      const double size_v = rng.uniform(0.3, 0.5) * view_h * depth;
      const std::uint64_t tex_seed = rng.next();
      if (!(n.dot(center) / n.z() > 0.5)) continue;
      TexturedQuad quad =
          make_scene_quad(n, center, size_u, size_v, depth * options.texture_cell_px / k.fx, tex_seed, rng);
      double quad_near = depth;
      for (const Vec3& c : quad.corners()) quad_near = std::min(quad_near, c.z());
      if (quad_near < 1.5) continue;
      nearest = std::min(nearest, quad_near);
      sample.scene.quads.push_back(std::move(quad));
      break;
    }
  }

  // Stereo pair: reference at the origin, second camera displaced along +x.
  const double baseline = std::min(rng.uniform(0.2, 0.35), options.max_parallax_px * nearest / k.fx);
  Pose second;
  second.translation = Vec3(baseline, 0.0, 0.0);

  // Target: orbit about a look-at point so rotation and translation grow together.
  const auto [lo, hi] = bin_bounds(bin);
  const double theta = rng.uniform(lo + 0.05 * (hi - lo), hi);
  const double look_depth = rng.uniform(options.orbit_radius_min, options.orbit_radius_max);
  const double horizontal = look_depth * std::sin(theta * std::numbers::pi / 180.0);
  double ay;
  if (extrapolate) {
    ay = rng.uniform(0.3, 1.0);  // moves away from the second camera
  } else {
    const double wanted_x = baseline * rng.uniform(0.15, 0.85);
    ay = -std::min(1.0, wanted_x / horizontal);
  }
  const double ax = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::sqrt(std::max(0.0, 1.0 - ay * ay));
  const Vec3 axis(ax, ay, 0.0);
  const Vec3 look(0.0, 0.0, look_depth);
  Pose target;
  target.rotation = rotation_about_axis(axis, theta);
  target.translation = look + target.rotation * (-look);

  const OracleView ref_view = render_oracle(sample.scene, k, Pose::identity());
  const OracleView sec_view = render_oracle(sample.scene, k, second);
  const OracleView tgt_view = render_oracle(sample.scene, k, target);

  sample.input = StereoInput{ref_view.image, sec_view.image, k, k, second};
  quantize_8bit(sample.input.reference);
  quantize_8bit(sample.input.second);

  TargetView tv;
  tv.intrinsics = k;
  tv.pose = target;
  tv.ground_truth = tgt_view.image;
  quantize_8bit(tv.ground_truth);
  tv.valid = cross_visible_mask(tgt_view, k, target, ref_view, k);
  tv.rotation_deg = rotation_angle_deg(target.rotation);
  tv.extrapolation = extrapolate;
  sample.targets.push_back(std::move(tv));
  return sample;
}

std::vector<SceneSample> generate_suite(std::uint64_t seed, int scenes_per_bin,
                                        double slant_range_deg, const SuiteOptions& options) {
  if (scenes_per_bin < 0) throw InvariantViolation("scenes_per_bin must be non-negative");
  if (slant_range_deg < 0.0 || slant_range_deg > 70.0)
    throw InvariantViolation("slant range must lie in [0, 70] degrees");
  if (!(options.orbit_radius_min > 0.0) || options.orbit_radius_max < options.orbit_radius_min)
    throw InvariantViolation("orbit radius range must satisfy 0 < min <= max");
  std::vector<SceneSample> suite(static_cast<std::size_t>(scenes_per_bin) * kRotationBins.size());
  Rng seeds(seed);
  std::vector<std::uint64_t> sample_seeds(suite.size());
  for (auto& s : sample_seeds) s = seeds.next();

#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < static_cast<int>(suite.size()); ++k) {
    const RotationBin bin = kRotationBins[k / scenes_per_bin];
    const int within = k % scenes_per_bin;
    suite[k] = generate_sample(sample_seeds[k], bin, within % 2 == 1, slant_range_deg, options);
    char id[32];
    std::snprintf(id, sizeof id, "sample_%04d", k);
    suite[k].id = id;
  }
  return suite;
}

namespace {

constexpr int kSuiteFormatVersion = 1;

}  // namespace

void save_suite(const std::vector<SceneSample>& suite, const fs::path& dir, std::uint64_t seed,
                double slant_range_deg, const SuiteOptions& options) {
  fs::create_directories(dir);
  Json samples = Json::array();
  for (const SceneSample& s : suite) {
    fs::create_directories(dir / s.id);
    write_png(dir / s.id / "reference.png", s.input.reference);
    write_png(dir / s.id / "second.png", s.input.second);
    Json targets = Json::array();
    for (std::size_t t = 0; t < s.targets.size(); ++t) {
      const TargetView& tv = s.targets[t];
      const std::string img = s.id + "/target_" + std::to_string(t) + ".png";
      const std::string mask = s.id + "/target_" + std::to_string(t) + "_valid.png";
      write_png(dir / img, tv.ground_truth);
      write_mask_png(dir / mask, tv.valid);
      targets.push_back({{"intrinsics", to_json(tv.intrinsics)},
                         {"target_to_reference", to_json(tv.pose)},
                         {"rotation_deg", tv.rotation_deg},
                         {"kind", tv.extrapolation ? "extrapolation" : "interpolation"},
                         {"image", img},
                         {"valid_mask", mask}});
    }
    Json quads = Json::array();
    for (const TexturedQuad& q : s.scene.quads)
      quads.push_back({{"normal", to_json(q.plane.normal())},
                       {"axis_depth", q.plane.axis_depth()},
                       {"corners", Json::array({to_json(q.corners()[0]), to_json(q.corners()[1]),
                                                to_json(q.corners()[2]), to_json(q.corners()[3])})},
                       {"texture_seed", q.texture.seed}});
    samples.push_back({{"id", s.id},
                       {"seed", s.seed},
                       {"bin", std::string(to_string(s.bin))},
                       {"reference_image", s.id + "/reference.png"},
                       {"second_image", s.id + "/second.png"},
                       {"reference_intrinsics", to_json(s.input.ref_cam)},
                       {"second_intrinsics", to_json(s.input.sec_cam)},
                       {"second_to_reference", to_json(s.input.rel_pose_sec)},
                       {"targets", targets},
                       {"quads", quads}});
  }
  const Json manifest = {{"format_version", kSuiteFormatVersion},
                         {"seed", seed},
                         {"slant_range_deg", slant_range_deg},
                         {"width", options.width},
                         {"height", options.height},
                         {"hfov_deg", options.hfov_deg},
                         {"orbit_radius_min", options.orbit_radius_min},
                         {"orbit_radius_max", options.orbit_radius_max},
                         {"samples", samples}};
  write_json_file(dir / "suite.json", manifest);
}

std::vector<SceneSample> load_suite(const fs::path& dir) {
  const Json m = read_json_file(dir / "suite.json");
  check_format_version(m, kSuiteFormatVersion, "suite.json");
  const Json& samples = require(m, "samples", "suite.json");
  std::vector<SceneSample> out;
  for (const Json& js : samples) {
    SceneSample s;
    s.id = require(js, "id", "suite.json.samples[]").get<std::string>();
    const std::string where = "suite.json." + s.id;
    s.seed = require(js, "seed", where).get<std::uint64_t>();
    s.bin = parse_rotation_bin(require(js, "bin", where).get<std::string>());
    s.input.reference = read_rgb_png(dir / require(js, "reference_image", where).get<std::string>());
    s.input.second = read_rgb_png(dir / require(js, "second_image", where).get<std::string>());
    s.input.ref_cam = intrinsics_from_json(require(js, "reference_intrinsics", where), where);
    s.input.sec_cam = intrinsics_from_json(require(js, "second_intrinsics", where), where);
    s.input.rel_pose_sec = pose_from_json(require(js, "second_to_reference", where), where);
    s.input.validate();
    for (const Json& jt : require(js, "targets", where)) {
      TargetView tv;
      tv.intrinsics = intrinsics_from_json(require(jt, "intrinsics", where), where);
      tv.pose = pose_from_json(require(jt, "target_to_reference", where), where);
      tv.rotation_deg = require_number(jt, "rotation_deg", where);
      tv.extrapolation = require(jt, "kind", where).get<std::string>() == "extrapolation";
      tv.ground_truth = read_rgb_png(dir / require(jt, "image", where).get<std::string>());
      tv.valid = read_mask_png(dir / require(jt, "valid_mask", where).get<std::string>());
      if (!tv.ground_truth.same_size(tv.intrinsics.width, tv.intrinsics.height))
        throw FormatError(where + ": target image size does not match its intrinsics");
      s.targets.push_back(std::move(tv));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace mhi
