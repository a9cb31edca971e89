#pragma once

#include <istream>
#include <optional>
#include <sstream>
#include <string>

#include "cltrack/association.hpp"
#include "cltrack/errors.hpp"
#include "cltrack/filter.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/keyvalue.hpp"
#include "cltrack/text.hpp"

namespace cltrack
{

/// Which score drives the greedy assignment.
///   fused:  alpha_c * camera + alpha_l * (1 - lidar)
///   camera: the camera matrix alone
///   lidar:  1 - lidar matrix alone
enum class AssociationMode { fused, camera, lidar };

inline const char * to_string(AssociationMode m)
{
  switch (m) {
    case AssociationMode::fused: return "fused";
    case AssociationMode::camera: return "camera";
    case AssociationMode::lidar: return "lidar";
  }
  return "?";
}

struct TrackerConfig
{
  double a_c = 0.3;      ///< camera IoU gate
  double a_l = 5.0;      ///< LiDAR centroid-distance gate, meters
  double a_f = 0.4;      ///< fused score gate
  double alpha_c = 0.5;
  double alpha_l = 0.5;
  int epsilon = 30;      ///< tracks unseen for more than this many frames are dropped
  int min_hits_to_report = 1;
  std::optional<double> unify_gate;  ///< 2D/3D duplicate gate; a_c when unset
  AssociationMode mode = AssociationMode::fused;

  NoiseModel noise2d{1.0, 0.1, 1000.0};
  NoiseModel noise3d{0.01, 0.1, 1000.0};

  std::optional<ImageSize> image;

  double effective_unify_gate() const { return unify_gate.value_or(a_c); }

  /// Throws ConfigError naming the first violated constraint.
  void validate() const
  {
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!open_unit(a_c)) throw ConfigError("a_c must lie in (0, 1)");
    if (!open_unit(a_f)) throw ConfigError("a_f must lie in (0, 1)");
    if (!open_unit(effective_unify_gate())) throw ConfigError("unify_gate must lie in (0, 1)");
    if (!(a_l > 0.0)) throw ConfigError("a_l must be positive");
    check_fusion_weights(alpha_c, alpha_l);
    if (epsilon < 1) throw ConfigError("epsilon must be at least 1");
    if (min_hits_to_report < 1) throw ConfigError("min_hits_to_report must be at least 1");
    for (const NoiseModel * n : {&noise2d, &noise3d}) {
      if (!(n->measurement_variance >= 0.0) || !(n->jerk_intensity >= 0.0) ||
          !(n->initial_variance > 0.0)) {
        throw ConfigError("noise parameters must be non-negative (P0 positive)");
      }
    }
    if (image && (image->width <= 0 || image->height <= 0)) {
      throw ConfigError("image dimensions must be positive");
    }
  }

  /// Applies recognized keys; unknown keys are an error.
  void apply(const KeyValueFile & kv)
  {
    for (const auto & [key, entry] : kv.entries()) {
      try {
        apply_one(key, entry.value);
      } catch (const ConfigError & e) {
        if (entry.line > 0) {
          throw ConfigError("line " + std::to_string(entry.line) + ": " + e.what());
        }
        throw;
      }
    }
  }

  static TrackerConfig parse(std::istream & in)
  {
    TrackerConfig config;
    config.apply(KeyValueFile::parse(in));
    config.validate();
    return config;
  }

  /// Round-trippable `key = value` rendering.
  std::string to_text() const
  {
    using text::shortest;
    std::ostringstream os;
    os << "a_c = " << shortest(a_c) << '\n'
       << "a_l = " << shortest(a_l) << '\n'
       << "a_f = " << shortest(a_f) << '\n'
       << "alpha_c = " << shortest(alpha_c) << '\n'
       << "alpha_l = " << shortest(alpha_l) << '\n'
       << "epsilon = " << epsilon << '\n'
       << "min_hits_to_report = " << min_hits_to_report << '\n'
       << "unify_gate = " << shortest(effective_unify_gate()) << '\n'
       << "association_mode = " << to_string(mode) << '\n'
       << "r2d = " << shortest(noise2d.measurement_variance) << '\n'
       << "r3d = " << shortest(noise3d.measurement_variance) << '\n'
       << "q2d = " << shortest(noise2d.jerk_intensity) << '\n'
       << "q3d = " << shortest(noise3d.jerk_intensity) << '\n'
       << "p0 = " << shortest(noise2d.initial_variance) << '\n';
    if (image) {
      os << "image_width = " << image->width << '\n' << "image_height = " << image->height << '\n';
    }
    return os.str();
  }

private:
  void apply_one(const std::string & key, const std::string & value)
  {
    auto number = [&]() {
      const auto v = text::to_double(value);
      if (!v) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
      return *v;
    };
    auto integer = [&]() {
      const auto v = text::to_int<int>(value);
      if (!v) throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
      return *v;
    };
    auto image_dims = [&]() -> ImageSize & {
      if (!image) image = ImageSize{};
      return *image;
    };

    if (key == "a_c") a_c = number();
    else if (key == "a_l") a_l = number();
    else if (key == "a_f") a_f = number();
    else if (key == "alpha_c") alpha_c = number();
    else if (key == "alpha_l") alpha_l = number();
    else if (key == "epsilon") epsilon = integer();
    else if (key == "min_hits_to_report") min_hits_to_report = integer();
    else if (key == "unify_gate") unify_gate = number();
    else if (key == "r2d") noise2d.measurement_variance = number();
    else if (key == "r3d") noise3d.measurement_variance = number();
    else if (key == "q") noise2d.jerk_intensity = noise3d.jerk_intensity = number();
    else if (key == "q2d") noise2d.jerk_intensity = number();
    else if (key == "q3d") noise3d.jerk_intensity = number();
    else if (key == "p0") noise2d.initial_variance = noise3d.initial_variance = number();
    else if (key == "image_width") image_dims().width = integer();
    else if (key == "image_height") image_dims().height = integer();
    else if (key == "association_mode") {
      if (value == "fused") mode = AssociationMode::fused;
      else if (value == "camera") mode = AssociationMode::camera;
      else if (value == "lidar") mode = AssociationMode::lidar;
      else throw ConfigError("association_mode must be fused, camera or lidar");
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
};

}  // namespace cltrack
