#include "doctest.h"

#include "screwreg/differential_evolution.hpp"
#include "screwreg/error.hpp"

#include <cmath>

using namespace screwreg;

namespace {

double sphere(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

Bounds box(std::size_t n, double lo, double hi) { return {std::vector<double>(n, lo), std::vector<double>(n, hi)}; }

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

}  // namespace

TEST_CASE("sphere in six dimensions") {
  DEConfig cfg;
  cfg.population_size = 60;
  cfg.max_generations = 300;
  cfg.seed = 7;
  cfg.tolerance = 0;
  const DEResult r = differential_evolution(sphere, box(6, -5, 5), cfg);
  CHECK(r.best_loss < 1e-6);
  CHECK(r.best.size() == 6);
  CHECK(r.history.size() == static_cast<std::size_t>(r.generations_run) + 1);
  CHECK(r.history.back() == r.best_loss);
  CHECK(sphere(r.best) == r.best_loss);
}

TEST_CASE("default tolerance stops early on sphere") {
  DEConfig cfg;
  cfg.max_generations = 300;
  cfg.seed = 7;
  const DEResult r = differential_evolution(sphere, box(6, -5, 5), cfg);
  CHECK(r.generations_run < 300);
  CHECK(r.best_loss < 1e-4);
}

TEST_CASE("seeded runs are bit-identical, including with threads") {
  DEConfig cfg;
  cfg.max_generations = 50;
  cfg.seed = 11;
  const DEResult a = differential_evolution(sphere, box(12, -3, 3), cfg);
  const DEResult b = differential_evolution(sphere, box(12, -3, 3), cfg);
  CHECK(a.history == b.history);
  CHECK(a.best == b.best);
  cfg.threads = 3;
  const DEResult c = differential_evolution(sphere, box(12, -3, 3), cfg);
  CHECK(a.history == c.history);
  CHECK(a.best == c.best);
  cfg.seed = 12;
  cfg.threads = 1;
  CHECK(differential_evolution(sphere, box(12, -3, 3), cfg).history != a.history);
}

TEST_CASE("population stays in bounds and history never increases") {
  // Optimum outside the box pushes trial vectors against the bounds.
  const auto shifted = [](std::span<const double> x) {
    double s = 0;
    for (double v : x) s += (v - 7) * (v - 7) + std::sin(5 * v);
    return s;
  };
  const Bounds b{{-1, -2, 0, -4}, {1, 3, 0.5, 4}};
  DEConfig cfg;
  cfg.population_size = 20;
  cfg.max_generations = 60;
  cfg.seed = 5;
  cfg.tolerance = 0;
  int calls = 0;
  const DEResult r = differential_evolution(shifted, b, cfg, std::nullopt, [&](int, const auto& pop) {
    ++calls;
    CHECK(pop.size() == 20);
    for (const auto& m : pop) CHECK(b.contains(m));
  });
  CHECK(calls == r.generations_run + 1);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
  CHECK(r.best[0] == 1.0);
  CHECK(r.best[2] == 0.5);
}

TEST_CASE("initial member is injected") {
  DEConfig cfg;
  cfg.max_generations = 0;
  cfg.seed = 3;
  std::size_t evals = 0;
  const auto f = [&](std::span<const double> x) {
    ++evals;
    return sphere(x);
  };
  const std::vector<double> start{0.25, -0.5, 1};
  const DEResult r = differential_evolution(f, box(3, -2, 2), cfg, start);
  CHECK(r.best == start);
  CHECK(r.best_loss == sphere(start));
  CHECK(r.generations_run == 0);
  CHECK(r.history == std::vector<double>{sphere(start)});
  CHECK(evals == 1);
  CHECK(r.evaluations == 1);

  // Seeding an optimum means the result can never be worse.
  cfg.max_generations = 20;
  const DEResult s = differential_evolution(sphere, box(3, -2, 2), cfg, std::vector<double>{0, 0, 0});
  CHECK(s.best_loss == 0.0);
  CHECK(s.history.front() == 0.0);
}

TEST_CASE("invalid bounds and configs") {
  DEConfig cfg;
  CHECK(code_of([&] { differential_evolution(sphere, Bounds{{0, 1}, {1, 1}}, cfg); }) == ErrorCode::InvalidBounds);
  CHECK(code_of([&] { differential_evolution(sphere, Bounds{{0}, {1, 1}}, cfg); }) == ErrorCode::InvalidBounds);
  CHECK(code_of([&] { differential_evolution(sphere, Bounds{}, cfg); }) == ErrorCode::InvalidBounds);
  const auto bad = [](auto mutate) {
    DEConfig c;
    mutate(c);
    return code_of([&] { differential_evolution(sphere, box(2, -1, 1), c); });
  };
  CHECK(bad([](DEConfig& c) { c.population_size = 3; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.weight = 0; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.weight = 2.5; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.crossover = 1.5; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.max_generations = -1; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.tolerance = -1; }) == ErrorCode::InvalidConfig);
  CHECK(bad([](DEConfig& c) { c.threads = 0; }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { differential_evolution(sphere, box(2, -1, 1), cfg, std::vector<double>{0, 0, 0}); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([&] { differential_evolution(sphere, box(2, -1, 1), cfg, std::vector<double>{0, 3}); }) ==
        ErrorCode::InvalidConfig);
}
