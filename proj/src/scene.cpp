#include "screwreg/scene.hpp"

#include "screwreg/error.hpp"

#include <algorithm>

namespace screwreg {

void ScrewScene::validate() const {
  if (!model) fail(ErrorCode::InvalidConfig, "scene has no screw model");
  if (views[0].landmarks.size() != views[1].landmarks.size()) {
    fail(ErrorCode::InvalidConfig, "AP and LAT screw counts differ");
  }
  if (views[0].landmarks.empty()) fail(ErrorCode::InvalidConfig, "scene has no screws");
  for (const auto v : {View::AP, View::LAT}) {
    const auto& d = view(v);
    const std::string name(to_string(v));
    if (d.image.width() < 3 || d.image.height() < 3) fail(ErrorCode::InvalidConfig, name + " image too small");
    if (!d.image.same_shape(d.foreground)) fail(ErrorCode::InvalidConfig, name + " foreground mask size differs");
    if (!d.image.same_shape(d.background)) fail(ErrorCode::InvalidConfig, name + " background mask size differs");
    for (std::size_t i = 0; i < d.landmarks.size(); ++i) {
      if (!d.landmarks[i].tip.allFinite() || !d.landmarks[i].center.allFinite()) {
        fail(ErrorCode::InvalidConfig, name + " landmark of screw " + std::to_string(i) + " is not finite");
      }
    }
  }
}

bool Combination::is_bijection() const {
  std::vector<int> sorted = mapping;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != static_cast<int>(i)) return false;
  return true;
}

}  // namespace screwreg
