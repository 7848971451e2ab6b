#include "doctest.h"
#include "oracles.hpp"

#include "screwreg/error.hpp"
#include "screwreg/render.hpp"
#include "screwreg/similarity.hpp"

#include <random>

using namespace screwreg;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

GrayImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0, 1);
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = u(rng);
  return img;
}

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double p) {
  std::bernoulli_distribution bit(p);
  BinaryMask m(w, h);
  for (auto& v : m.pixels()) v = bit(rng);
  return m;
}

}  // namespace

TEST_CASE("gradients of simple images") {
  const GradientField c = gradients(GrayImage(6, 5, 0.3));
  for (std::size_t i = 0; i < c.gx.size(); ++i) {
    CHECK(c.gx[i] == 0.0);
    CHECK(c.gy[i] == 0.0);
  }
  GrayImage ramp(10, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) ramp(x, y) = x / 10.0;
  const GradientField r = gradients(ramp);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 10; ++x) {
      CHECK(r.gx[y * 10 + x] == doctest::Approx(0.1).epsilon(1e-12));
      CHECK(r.gy[y * 10 + x] == 0.0);
    }
  }
  CHECK(code_of([] { gradients(GrayImage(2, 5)); }) == ErrorCode::ImageTooSmall);
  CHECK(code_of([] { gradients(GrayImage(5, 2)); }) == ErrorCode::ImageTooSmall);
}

TEST_CASE("gradients match the finite-difference oracle") {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 20; ++k) {
    std::uniform_int_distribution<int> dim(3, 40);
    const GrayImage img = random_image(rng, dim(rng), dim(rng));
    const GradientField g = gradients(img);
    const auto [ox, oy] = oracle::gradients(img);
    for (std::size_t i = 0; i < ox.size(); ++i) {
      CHECK(std::abs(g.gx[i] - ox[i]) <= 1e-12);
      CHECK(std::abs(g.gy[i] - oy[i]) <= 1e-12);
    }
  }
}

TEST_CASE("gcl analytic cases") {
  std::mt19937_64 rng(52);
  const GrayImage a = random_image(rng, 24, 18);
  GrayImage inv(24, 18);
  for (std::size_t i = 0; i < a.size(); ++i) inv.pixels()[i] = 1 - a.data()[i];
  CHECK(gcl(a, a) == doctest::Approx(-1).epsilon(1e-9));
  CHECK(gcl(a, inv) == doctest::Approx(1).epsilon(1e-9));

  GrayImage xs(16, 16), ys(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      xs(x, y) = std::sin(0.7 * x);
      ys(x, y) = std::cos(0.4 * y);
    }
  }
  CHECK(std::abs(gcl(xs, ys)) <= 1e-12);
  CHECK(gcl(GrayImage(8, 8, 0.5), GrayImage(8, 8, 0.2)) == 0.0);
  CHECK(gcl(GrayImage(16, 16, 0.5), xs) == 0.0);
  CHECK(code_of([&] { gcl(a, xs); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("gcl matches the oracle and its invariants") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> scale(0.01, 50), shift(-5, 5);
  for (int k = 0; k < 50; ++k) {
    const GrayImage a = random_image(rng, 20, 15), b = random_image(rng, 20, 15);
    const double v = gcl(a, b);
    CHECK(std::abs(v - oracle::gcl(a, b)) <= 1e-12);
    CHECK(std::abs(v - gcl(b, a)) <= 1e-12);
    CHECK(v >= -1 - 1e-12);
    CHECK(v <= 1 + 1e-12);
    const double s = scale(rng), t = shift(rng);
    GrayImage bt(20, 15);
    for (std::size_t i = 0; i < b.size(); ++i) bt.pixels()[i] = s * b.data()[i] + t;
    CHECK(std::abs(gcl(a, bt) - v) <= 1e-9);
  }
}

TEST_CASE("binary masks are promoted to gray") {
  std::mt19937_64 rng(54);
  for (int k = 0; k < 20; ++k) {
    const BinaryMask m = random_mask(rng, 30, 20, 0.3);
    const GrayImage real = random_image(rng, 30, 20);
    CHECK(gcl(m, real) == doctest::Approx(oracle::gcl(to_gray(m), real)).epsilon(1e-12));
  }
}

TEST_CASE("GradientCorrelation agrees with gcl over any covering box") {
  std::mt19937_64 rng(55);
  for (int k = 0; k < 40; ++k) {
    const GrayImage real = random_image(rng, 40, 30);
    const GradientCorrelation corr(real);
    BinaryMask m(40, 30, 0);
    std::uniform_int_distribution<int> ux(0, 39), uy(0, 29);
    int x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    PixelBox box;
    std::bernoulli_distribution bit(0.6);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (bit(rng)) {
          m(x, y) = 1;
          box.include(x, y);
        }
    const double want = oracle::gcl(to_gray(m), real);
    CHECK(std::abs(corr(m) - want) <= 1e-12);
    CHECK(std::abs(corr(m, box) - want) <= 1e-12);
  }
  const GrayImage real = random_image(rng, 10, 10);
  CHECK(GradientCorrelation(real)(BinaryMask(10, 10, 0)) == 0.0);
}

TEST_CASE("dice") {
  BinaryMask a(4, 4, 0), b(4, 4, 0);
  a(0, 0) = a(1, 0) = a(2, 0) = a(3, 0) = 1;
  b(2, 0) = b(3, 0) = b(0, 1) = b(1, 1) = 1;
  CHECK(dice(a, b) == 0.5);
  CHECK(dice(a, a) == 1.0);
  BinaryMask c(4, 4, 0);
  c(0, 3) = 1;
  CHECK(dice(a, c) == 0.0);
  CHECK(code_of([] { dice(BinaryMask(3, 3, 0), BinaryMask(3, 3, 0)); }) == ErrorCode::BothEmpty);
  CHECK(code_of([&] { dice(a, BinaryMask(3, 3, 1)); }) == ErrorCode::DimensionMismatch);

  std::mt19937_64 rng(56);
  for (int k = 0; k < 20; ++k) {
    const BinaryMask x = random_mask(rng, 12, 9, 0.4), y = random_mask(rng, 12, 9, 0.4);
    CHECK(dice(x, y) == dice(y, x));
  }
}

TEST_CASE("mean_loss") {
  CHECK(mean_loss(-0.23, -0.24) == doctest::Approx(-0.235).epsilon(1e-15));
  CHECK(mean_loss(0, 0) == 0.0);
  CHECK(mean_loss(-1, 1) == 0.0);
  CHECK(mean_loss(-0.7, -0.7) == -0.7);
  const LossReport r = LossReport::from(-0.23, -0.24);
  CHECK(r.mean_loss == mean_loss(-0.23, -0.24));
}
