#include <chrono>

#include "cli/app.h"
#include "cli/documents.h"
#include "cli/instances.h"
#include "treeint/error.h"

namespace treeint::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

poly::CiiSpec parse_index(const std::string& name) {
  poly::CiiSpec spec;
  if (name == "sii") {
    spec.kind = poly::IndexKind::kSii;
  } else if (name == "banzhaf") {
    spec.kind = poly::IndexKind::kBanzhaf;
  } else {
    throw InputError("unknown index \"" + name + "\"");
  }
  return spec;
}

}  // namespace

int cmd_explain(const ExplainOptions& options, Io io, const Hooks& hooks) {
  return guarded(io, [&] {
    const auto load_start = Clock::now();
    const Ensemble ensemble = load_ensemble_file(options.model);
    const auto instances =
        load_instances(options.instances, options.instance, ensemble);
    const poly::CiiSpec index = parse_index(options.index);
    const GridKind grid = parse_grid(options.grid);
    const int n = ensemble.n_features;
    const bool nsii = options.max_order.has_value();
    const int top = nsii ? *options.max_order : options.order.value_or(1);
    if (top > n) {
      throw InputError("order " + std::to_string(top) + " exceeds the " +
                       std::to_string(n) + " model features");
    }
    if (nsii && index.kind != poly::IndexKind::kSii) {
      throw InputError("--max-order aggregates n-SII and requires --index sii");
    }
    const Explainer explainer(ensemble);
    const double load_seconds = seconds_since(load_start);

    ExplanationDocument doc;
    doc.model_digest = model_digest(ensemble);
    doc.index_kind = nsii ? "n-sii" : index_label(index.kind);
    doc.mode = nsii ? "max-order" : "order";
    if (nsii) {
      for (int k = 1; k <= top; ++k) doc.orders.push_back(k);
    } else {
      doc.orders.push_back(top);
    }
    doc.feature_names = feature_labels(ensemble);
    doc.rows.resize(instances.size());

    const auto explain_start = Clock::now();
    parallel_for(static_cast<int>(instances.size()), options.threads, [&](int r) {
      ExplanationRow& row = doc.rows[r];
      const std::vector<double>& x = instances[r];
      row.instance = x;
      if (nsii) {
        std::vector<InteractionResult> sii;
        for (int k = 1; k <= top; ++k) {
          ExplainConfig config;
          config.order = k;
          config.grid = grid;
          config.zero_floor = 0.0;
          sii.push_back(call_explain(hooks, explainer, x, config));
        }
        row.results = aggregate_nsii(sii);
        row.efficiency_residual = efficiency_residual(row.results);
        return;
      }
      ExplainConfig config;
      config.order = top;
      config.index = index;
      config.grid = grid;
      row.results.push_back(call_explain(hooks, explainer, x, config));
      if (top == 1 && index.kind == poly::IndexKind::kSii) {
        row.efficiency_residual = efficiency_residual(row.results);
      }
    });
    if (options.timing) {
      Json timing;
      timing["load_seconds"] = load_seconds;
      timing["explain_seconds"] = seconds_since(explain_start);
      doc.timing = std::move(timing);
    }
    emit(dump(to_json(doc)), options.out, options.to_stdout, io);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace treeint::cli
