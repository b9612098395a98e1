#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

#include "cli/app.h"
#include "cli/documents.h"
#include "treeint/error.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"

namespace treeint::cli {

TimingStats time_repeated(int repetitions, const std::function<void()>& fn) {
  using Clock = std::chrono::steady_clock;
  std::vector<double> samples;
  samples.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    const auto start = Clock::now();
    fn();
    samples.push_back(std::chrono::duration<double>(Clock::now() - start).count());
  }
  TimingStats stats;
  if (samples.empty()) return stats;
  for (double s : samples) stats.mean += s;
  stats.mean /= static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double var = 0.0;
    for (double s : samples) var += (s - stats.mean) * (s - stats.mean);
    stats.stddev = std::sqrt(var / static_cast<double>(samples.size() - 1));
  }
  return stats;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw InputError("a slope fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InputError("a slope fit needs distinct x values");
  return sxy / sxx;
}

int cmd_bench(const BenchOptions& options, Io io) {
  return guarded(io, [&] {
    Json rows = Json::array();
    // (n, depth, order) -> [(leaves, mean)] for the slope fits.
    std::map<std::tuple<int, int, int>, std::vector<std::pair<double, double>>> series;
    // (n, depth, leaves) -> [(order, mean)] for the order ratios.
    std::map<std::tuple<int, int, int>, std::vector<std::pair<int, double>>> by_order;
    std::uint64_t config_index = 0;
    for (int n : options.n_features) {
      for (int depth : options.depths) {
        for (int leaves : options.leaves) {
          TreeSpec spec;
          spec.n_features = n;
          spec.max_depth = depth;
          spec.leaves = leaves;
          const Ensemble ensemble =
              random_ensemble(spec, options.trees, options.seed + config_index++);
          std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
          const auto instances = random_instances(n, options.instances, rng);
          const Explainer explainer(ensemble);
          for (int order : options.orders) {
            if (order < 1 || order > n) {
              throw InputError("order " + std::to_string(order) +
                               " outside 1.." + std::to_string(n));
            }
            ExplainConfig config;
            config.order = order;
            // Untimed warm-up builds the weight tables.
            explainer.explain(instances[0], config);
            const TimingStats engine = time_repeated(options.repetitions, [&] {
              for (const auto& x : instances) explainer.explain(x, config);
            });
            Json row;
            row["n_features"] = n;
            row["depth"] = depth;
            row["leaves"] = leaves;
            row["trees"] = options.trees;
            row["order"] = order;
            row["repetitions"] = options.repetitions;
            row["instances"] = options.instances;
            row["mean_seconds"] = engine.mean;
            row["std_seconds"] = engine.stddev;
            if (options.naive) {
              const TimingStats naive = time_repeated(options.repetitions, [&] {
                for (const auto& x : instances) oracle::brute_all(ensemble, x, order);
              });
              row["naive_mean_seconds"] = naive.mean;
              row["naive_std_seconds"] = naive.stddev;
              row["speedup"] = naive.mean / engine.mean;
            }
            rows.push_back(std::move(row));
            series[{n, depth, order}].emplace_back(leaves, engine.mean);
            by_order[{n, depth, leaves}].emplace_back(order, engine.mean);
          }
        }
      }
    }
    Json fits = Json::array();
    for (const auto& [key, points] : series) {
      if (points.size() < 2) continue;
      std::vector<double> xs, ys;
      for (const auto& [x, y] : points) {
        xs.push_back(x);
        ys.push_back(y);
      }
      Json fit;
      fit["n_features"] = std::get<0>(key);
      fit["depth"] = std::get<1>(key);
      fit["order"] = std::get<2>(key);
      fit["leaves_loglog_slope"] = loglog_slope(xs, ys);
      fits.push_back(std::move(fit));
    }
    // Time growth between consecutive orders next to the binomial growth of
    // the per-edge update count, which bounds it from above.
    Json ratios = Json::array();
    for (const auto& [key, points] : by_order) {
      for (std::size_t k = 1; k < points.size(); ++k) {
        const int n = std::get<0>(key);
        const int s = points[k].first;
        const int prev = points[k - 1].first;
        Json r;
        r["n_features"] = n;
        r["depth"] = std::get<1>(key);
        r["leaves"] = std::get<2>(key);
        r["from_order"] = prev;
        r["to_order"] = s;
        r["time_ratio"] = points[k].second / points[k - 1].second;
        r["binomial_ratio"] =
            binomial_real(n - 1, s - 1) / binomial_real(n - 1, prev - 1);
        ratios.push_back(std::move(r));
      }
    }
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["seed"] = options.seed;
    doc["rows"] = std::move(rows);
    doc["fits"] = std::move(fits);
    doc["order_ratios"] = std::move(ratios);
    emit(dump(doc), options.out, options.to_stdout, io);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace treeint::cli
