#include <fmt/format.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cli/app.h"
#include "cli/documents.h"
#include "cli/instances.h"
#include "treeint/error.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"

namespace treeint::cli {

namespace {

constexpr double kAbsoluteFloor = 1e-12;

struct Check {
  int row = 0;
  int order = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;
  // Largest deviation measured against its allowance.
  double worst_ratio = -1.0;
  Subset worst_subset;
  double worst_engine = 0.0;
  double worst_oracle = 0.0;
  bool pass = true;
};

Check compare(const InteractionResult& engine, const InteractionResult& oracle,
              int n, double tolerance) {
  Check check;
  check.order = oracle.order;
  Subset subset(oracle.order);
  for (int i = 0; i < oracle.order; ++i) subset[i] = i;
  do {
    const double e = engine.scores.get(subset);
    const double o = oracle.scores.get(subset);
    const double dev = std::abs(e - o);
    const double allowance = std::max(tolerance * std::abs(o), kAbsoluteFloor);
    check.max_abs = std::max(check.max_abs, dev);
    check.max_rel = std::max(check.max_rel, dev / std::max(std::abs(o), kAbsoluteFloor));
    const double ratio = dev / allowance;
    if (ratio > check.worst_ratio) {
      check.worst_ratio = ratio;
      check.worst_subset = subset;
      check.worst_engine = e;
      check.worst_oracle = o;
    }
    if (!(dev <= allowance)) check.pass = false;
  } while (next_combination(subset, n));
  return check;
}

std::string subset_text(const Subset& s) {
  std::ostringstream out;
  out << "[";
  for (std::size_t k = 0; k < s.size(); ++k) out << (k ? ", " : "") << s[k];
  out << "]";
  return out.str();
}

}  // namespace

int cmd_verify(const VerifyOptions& options, Io io, const Hooks& hooks) {
  return guarded(io, [&] {
    const Ensemble ensemble = load_ensemble_file(options.model);
    const int n = ensemble.n_features;
    std::vector<int> orders;
    if (options.order) {
      orders.push_back(*options.order);
    } else {
      const int top = options.max_order.value_or(std::min(3, n));
      for (int k = 1; k <= top; ++k) orders.push_back(k);
    }
    for (int s : orders) {
      if (s > n) {
        throw InputError("order " + std::to_string(s) + " exceeds the " +
                         std::to_string(n) + " model features");
      }
      if (n - s > oracle::kMaxFreePlayers) {
        throw LimitError("brute force at order " + std::to_string(s) +
                         " would enumerate 2^" + std::to_string(n - s) +
                         " coalitions (limit 2^" +
                         std::to_string(oracle::kMaxFreePlayers) + ")");
      }
    }
    std::vector<std::vector<double>> instances;
    if (!options.instances.empty() || !options.instance.empty()) {
      instances = load_instances(options.instances, options.instance, ensemble);
    } else {
      std::mt19937_64 rng(options.seed);
      instances = random_instances(n, options.random_instances, rng);
    }
    poly::CiiSpec index;
    index.kind = options.index == "banzhaf" ? poly::IndexKind::kBanzhaf
                                            : poly::IndexKind::kSii;
    const GridKind grid = parse_grid(options.grid);
    const Explainer explainer(ensemble);

    const int rows = static_cast<int>(instances.size());
    const int per_row = static_cast<int>(orders.size());
    std::vector<Check> checks(rows * per_row);
    parallel_for(rows * per_row, options.threads, [&](int job) {
      const int r = job / per_row;
      const int s = orders[job % per_row];
      ExplainConfig config;
      config.order = s;
      config.index = index;
      config.grid = grid;
      const InteractionResult engine =
          call_explain(hooks, explainer, instances[r], config);
      oracle::BruteOptions brute;
      brute.shuffle_seed = options.seed + static_cast<std::uint64_t>(job);
      const InteractionResult truth =
          oracle::brute_all(ensemble, instances[r], s, index, brute);
      Check check = compare(engine, truth, n, options.tolerance);
      check.row = r;
      checks[job] = std::move(check);
    });

    bool pass = true;
    Json report;
    report["schema_version"] = kSchemaVersion;
    report["model_digest"] = model_digest(ensemble);
    report["index_kind"] = options.index;
    report["tolerance"] = options.tolerance;
    report["absolute_floor"] = kAbsoluteFloor;
    Json entries = Json::array();
    for (const Check& c : checks) {
      Json j;
      j["row"] = c.row;
      j["order"] = c.order;
      j["max_abs_deviation"] = c.max_abs;
      j["max_rel_deviation"] = c.max_rel;
      j["worst_subset"] = subset_json(c.worst_subset);
      j["worst_engine"] = c.worst_engine;
      j["worst_oracle"] = c.worst_oracle;
      j["pass"] = c.pass;
      entries.push_back(std::move(j));
      if (!c.pass) {
        pass = false;
        io.err << fmt::format("verify: FAIL row {} order {} subset {}: engine={} oracle={}\n",
                              c.row, c.order, subset_text(c.worst_subset),
                              c.worst_engine, c.worst_oracle);
      }
    }
    report["pass"] = pass;
    report["checks"] = std::move(entries);
    emit(dump(report), options.out, options.to_stdout, io);
    return static_cast<int>(pass ? kExitOk : kExitVerifyFailed);
  });
}

}  // namespace treeint::cli
