#pragma once

// Named phantom suites used by the acceptance checks and bundled with the CLI.
// Each suite is a deterministic list of PhantomSpec; ids are unique per suite.

#include <string>
#include <vector>

#include "alw/error.hpp"
#include "alw/phantom.hpp"

namespace alw::suites {

namespace detail {

inline phantom::Background cycle_background(int i) {
  static constexpr phantom::Background order[] = {phantom::Background::flat, phantom::Background::stripes,
                                                  phantom::Background::speckle};
  return order[i % 3];
}

inline std::string case_id(const std::string& prefix, int i) {
  return prefix + (i < 10 ? "0" : "") + std::to_string(i);
}

}  // namespace detail

/// Twelve non-circular lesions across the size/contrast/noise taxonomy.
inline std::vector<phantom::PhantomSpec> standard() {
  static constexpr double sizes[] = {28, 36, 44, 52, 60, 68, 76, 84, 92, 100, 110, 120};
  static constexpr double contrasts[] = {0.5, 0.3, 0.4, 0.25, 0.5, 0.35, 0.3, 0.45, 0.4, 0.3, 0.5, 0.35};
  std::vector<phantom::PhantomSpec> v;
  for (int i = 0; i < 12; ++i) {
    phantom::PhantomSpec s;
    s.id = detail::case_id("std", i);
    s.shape = i % 2 == 0 ? phantom::Shape::ellipse : phantom::Shape::blob;
    s.size_px = sizes[i];
    s.aspect = 0.8 + 0.01 * (i % 4);
    s.angle_deg = 17.0 * i;
    s.contrast = contrasts[i];
    s.noise_sigma = 0.02 + 0.01 * (i % 4);
    s.heterogeneity = 0.02 * (i % 3);
    s.background = detail::cycle_background(i);
    s.texture_amplitude = 0.05;
    s.rng_seed = 1000 + static_cast<std::uint64_t>(i);
    v.push_back(s);
  }
  return v;
}

/// Disks and ellipses with contrast >= 0.3 and noise sigma <= 0.05.
inline std::vector<phantom::PhantomSpec> easy() {
  std::vector<phantom::PhantomSpec> v;
  int i = 0;
  for (double contrast : {0.3, 0.5}) {
    for (auto shape : {phantom::Shape::disk, phantom::Shape::ellipse}) {
      for (double size : {30.0, 50.0, 80.0}) {
        phantom::PhantomSpec s;
        s.id = detail::case_id("easy", i);
        s.shape = shape;
        s.size_px = size;
        s.aspect = shape == phantom::Shape::ellipse ? 0.75 : 1.0;
        s.angle_deg = 15.0 * (i + 1);
        s.contrast = contrast;
        s.noise_sigma = 0.05;
        s.background = detail::cycle_background(i + 1);
        s.texture_amplitude = 0.05;
        s.rng_seed = 2000 + static_cast<std::uint64_t>(i);
        v.push_back(s);
        ++i;
      }
    }
  }
  return v;
}

/// Twenty low-contrast, noisy, heterogeneous lesions.
inline std::vector<phantom::PhantomSpec> hard() {
  std::vector<phantom::PhantomSpec> v;
  for (int i = 0; i < 20; ++i) {
    phantom::PhantomSpec s;
    s.id = detail::case_id("hard", i);
    s.shape = i % 3 == 0 ? phantom::Shape::disk : (i % 3 == 1 ? phantom::Shape::ellipse : phantom::Shape::blob);
    s.size_px = 30.0 + (i * 7) % 50;
    s.aspect = 0.75;
    s.angle_deg = 23.0 * i;
    s.contrast = 0.1;
    s.noise_sigma = 0.15;
    s.heterogeneity = 0.1;
    s.background = i % 2 == 0 ? phantom::Background::flat : phantom::Background::speckle;
    s.texture_amplitude = 0.05;
    s.rng_seed = 3000 + static_cast<std::uint64_t>(i);
    v.push_back(s);
  }
  return v;
}

/// Large (60-150 px) lesions on textured backgrounds.
inline std::vector<phantom::PhantomSpec> large_textured() {
  static constexpr double sizes[] = {60, 80, 100, 120, 135, 150};
  std::vector<phantom::PhantomSpec> v;
  for (int i = 0; i < 6; ++i) {
    phantom::PhantomSpec s;
    s.id = detail::case_id("large", i);
    s.shape = i % 2 == 0 ? phantom::Shape::blob : phantom::Shape::ellipse;
    s.size_px = sizes[i];
    s.aspect = 0.85;
    s.angle_deg = 31.0 * i;
    s.contrast = 0.3;
    s.noise_sigma = 0.05;
    s.heterogeneity = 0.05;
    s.background = i % 2 == 0 ? phantom::Background::speckle : phantom::Background::stripes;
    s.texture_amplitude = 0.1;
    s.rng_seed = 4000 + static_cast<std::uint64_t>(i);
    v.push_back(s);
  }
  return v;
}

/// Small (20-40 px) lesions on flat backgrounds with little noise.
inline std::vector<phantom::PhantomSpec> small_smooth() {
  static constexpr double sizes[] = {20, 24, 28, 32, 36, 40};
  std::vector<phantom::PhantomSpec> v;
  for (int i = 0; i < 6; ++i) {
    phantom::PhantomSpec s;
    s.id = detail::case_id("small", i);
    s.shape = i % 2 == 0 ? phantom::Shape::disk : phantom::Shape::ellipse;
    s.size_px = sizes[i];
    s.aspect = 0.85;
    s.angle_deg = 29.0 * i;
    s.contrast = 0.4;
    s.noise_sigma = 0.02;
    s.background = phantom::Background::flat;
    s.texture_amplitude = 0.0;
    s.rng_seed = 5000 + static_cast<std::uint64_t>(i);
    v.push_back(s);
  }
  return v;
}

inline std::vector<phantom::PhantomSpec> by_name(const std::string& name) {
  if (name == "standard") return standard();
  if (name == "easy") return easy();
  if (name == "hard") return hard();
  if (name == "large-textured") return large_textured();
  if (name == "small-smooth") return small_smooth();
  throw InvalidInput("unknown suite '" + name + "'");
}

}  // namespace alw::suites
