#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace screwreg {

struct DEConfig {
  int population_size = 60;
  double weight = 0.5;     // F
  double crossover = 0.9;  // CR
  int max_generations = 200;
  double tolerance = 1e-4;  // stop when worst - best < tolerance
  std::uint64_t seed = 0;
  int threads = 1;  // objective evaluations per generation run on this many threads

  /// Throws InvalidConfig.
  void validate() const;
};

/// Per-component search box.
struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
  /// Throws InvalidBounds unless lo < hi componentwise and sizes agree.
  void validate() const;
  bool contains(std::span<const double> x) const;
};

struct DEResult {
  std::vector<double> best;
  double best_loss = 0.0;
  /// history[0] is the initial population's best; one entry per generation after.
  std::vector<double> history;
  int generations_run = 0;
  std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// Invoked after every generation with the whole population (for invariant checks).
using GenerationObserver = std::function<void(int generation, const std::vector<std::vector<double>>& population)>;

/// DE/rand/1/bin with clamp-to-bounds repair and synchronous greedy selection.
/// When `initial_member` is given it becomes population member 0; with
/// max_generations == 0 only that member is evaluated.
DEResult differential_evolution(const Objective& f, const Bounds& bounds, const DEConfig& cfg,
                                const std::optional<std::vector<double>>& initial_member = std::nullopt,
                                const GenerationObserver& observer = {});

}  // namespace screwreg
