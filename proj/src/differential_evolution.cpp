#include "screwreg/differential_evolution.hpp"

#include "screwreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace screwreg {

void DEConfig::validate() const {
  if (population_size < 4) fail(ErrorCode::InvalidConfig, "population_size must be >= 4");
  if (!(weight > 0.0 && weight <= 2.0)) fail(ErrorCode::InvalidConfig, "F must lie in (0, 2]");
  if (!(crossover >= 0.0 && crossover <= 1.0)) fail(ErrorCode::InvalidConfig, "CR must lie in [0, 1]");
  if (max_generations < 0) fail(ErrorCode::InvalidConfig, "max_generations must be >= 0");
  if (!(tolerance >= 0.0)) fail(ErrorCode::InvalidConfig, "tolerance must be >= 0");
  if (threads < 1) fail(ErrorCode::InvalidConfig, "threads must be >= 1");
}

void Bounds::validate() const {
  if (lo.size() != hi.size() || lo.empty()) fail(ErrorCode::InvalidBounds, "bounds must be non-empty and paired");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i])) {
      fail(ErrorCode::InvalidBounds, "bound " + std::to_string(i) + " requires finite lo < hi");
    }
  }
}

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

namespace {

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

void evaluate_batch(const Objective& f, const std::vector<std::vector<double>>& xs, std::vector<double>& out,
                    int threads) {
  out.resize(xs.size());
  const auto n = xs.size();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = safe_eval(f, xs[i]);
    return;
  }
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) out[i] = safe_eval(f, xs[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

DEResult differential_evolution(const Objective& f, const Bounds& bounds, const DEConfig& cfg,
                                const std::optional<std::vector<double>>& initial_member,
                                const GenerationObserver& observer) {
  bounds.validate();
  cfg.validate();
  const std::size_t dim = bounds.size();
  if (initial_member && initial_member->size() != dim) {
    fail(ErrorCode::InvalidConfig, "initial member has wrong dimension");
  }
  if (initial_member && !bounds.contains(*initial_member)) fail(ErrorCode::InvalidConfig, "initial member out of bounds");

  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t j = 0; j < dim; ++j) x[j] = std::clamp(x[j], bounds.lo[j], bounds.hi[j]);
  };

  DEResult result;
  if (cfg.max_generations == 0 && initial_member) {
    result.best = *initial_member;
    clamp(result.best);
    result.best_loss = safe_eval(f, result.best);
    result.history = {result.best_loss};
    result.evaluations = 1;
    return result;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto np = static_cast<std::size_t>(cfg.population_size);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (std::size_t i = 0; i < np; ++i) {
    if (i == 0 && initial_member) {
      pop[0] = *initial_member;
      clamp(pop[0]);
      continue;
    }
    for (std::size_t j = 0; j < dim; ++j) pop[i][j] = bounds.lo[j] + unit(rng) * (bounds.hi[j] - bounds.lo[j]);
  }
  std::vector<double> cost;
  evaluate_batch(f, pop, cost, cfg.threads);
  result.evaluations = np;

  auto best_index = [&] { return static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin()); };
  result.history.push_back(cost[best_index()]);
  if (observer) observer(0, pop);

  std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
  std::vector<double> trial_cost;
  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    const auto [lo_it, hi_it] = std::minmax_element(cost.begin(), cost.end());
    if (*hi_it - *lo_it < cfg.tolerance) break;

    // All random draws happen here, before the (possibly parallel) evaluation.
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = pick_dim(rng);
      auto& t = trials[i];
      for (std::size_t j = 0; j < dim; ++j) {
        const bool take = unit(rng) < cfg.crossover || j == forced;
        t[j] = take ? pop[r1][j] + cfg.weight * (pop[r2][j] - pop[r3][j]) : pop[i][j];
      }
      clamp(t);
    }
    evaluate_batch(f, trials, trial_cost, cfg.threads);
    result.evaluations += np;

    for (std::size_t i = 0; i < np; ++i) {
      if (trial_cost[i] <= cost[i]) {
        pop[i].swap(trials[i]);
        cost[i] = trial_cost[i];
      }
    }
    result.history.push_back(cost[best_index()]);
    result.generations_run = gen;
    if (observer) observer(gen, pop);
  }

  const auto b = best_index();
  result.best = pop[b];
  result.best_loss = cost[b];
  return result;
}

}  // namespace screwreg
