#pragma once

#include "screwreg/geometry.hpp"
#include "screwreg/image.hpp"
#include "screwreg/mesh.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace screwreg {

struct ScrewLandmarks {
  Point2 tip = Point2::Zero();
  Point2 center = Point2::Zero();
};

struct ViewData {
  GrayImage image;
  BinaryMask foreground;  // segmentation of the real image, the Dice reference
  BinaryMask background;  // M_bg
  ProjectionMatrix projection;
  std::vector<ScrewLandmarks> landmarks;  // indexed by this view's screw order
};

/// Two calibrated views of the same screws plus the shared screw model.
struct ScrewScene {
  std::array<ViewData, 2> views;
  std::shared_ptr<const ScrewModel> model;

  ViewData& view(View v) { return views[static_cast<int>(v)]; }
  const ViewData& view(View v) const { return views[static_cast<int>(v)]; }
  int width(View v) const { return view(v).image.width(); }
  int height(View v) const { return view(v).image.height(); }
  std::size_t screw_count() const { return views[0].landmarks.size(); }

  /// Throws InvalidConfig on inconsistent sizes or counts.
  void validate() const;
};

/// Bijection from AP screw index to LAT screw index; label is 1-based.
struct Combination {
  std::vector<int> mapping;
  int label = 1;

  int lat_of(std::size_t ap_index) const { return mapping[ap_index]; }
  bool is_bijection() const;
  friend bool operator==(const Combination&, const Combination&) = default;
};

}  // namespace screwreg
