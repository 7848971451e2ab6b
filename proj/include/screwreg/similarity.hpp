#pragma once

#include "screwreg/image.hpp"
#include "screwreg/render.hpp"

#include <vector>

namespace screwreg {

struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
};

/// Central differences inside, one-sided differences on the one-pixel border.
/// Throws ImageTooSmall below 3x3.
GradientField gradients(const GrayImage& img);

/// Gradient correlation loss: -sum(gp . gr) / (sqrt(sum |gp|^2) sqrt(sum |gr|^2)).
/// Returns 0 when either squared-gradient sum is below 1e-12.
double gcl(const GrayImage& proj, const GrayImage& real);
double gcl(const BinaryMask& proj, const GrayImage& real);

/// 2|a & b| / (|a| + |b|). Throws BothEmpty or DimensionMismatch.
double dice(const BinaryMask& a, const BinaryMask& b);

double mean_loss(double ap, double lat);

struct LossReport {
  double ap_loss = 0.0;
  double lat_loss = 0.0;
  double mean_loss = 0.0;

  static LossReport from(double ap, double lat) { return {ap, lat, screwreg::mean_loss(ap, lat)}; }
  friend bool operator==(const LossReport&, const LossReport&) = default;
};

/// GCL against a fixed real image with its gradients precomputed. Evaluating
/// a binary projection only visits the pixels around its nonzero box.
class GradientCorrelation {
 public:
  GradientCorrelation() = default;
  explicit GradientCorrelation(const GrayImage& real);

  int width() const { return field_.width; }
  int height() const { return field_.height; }

  /// `box` must cover every nonzero pixel of `proj`.
  double operator()(const BinaryMask& proj, const PixelBox& box) const;
  double operator()(const BinaryMask& proj) const;

 private:
  GradientField field_;
  double real_norm_ = 0.0;
};

}  // namespace screwreg
