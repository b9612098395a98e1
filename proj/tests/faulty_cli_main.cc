// treeint CLI whose engine flips the sign of one order-2 score.
#include "cli/app.h"

int main(int argc, char** argv) {
  treeint::cli::Hooks hooks;
  hooks.explain = [](const treeint::Explainer& explainer, std::span<const double> x,
                     const treeint::ExplainConfig& config) {
    treeint::InteractionResult r = explainer.explain(x, config);
    if (config.order == 2) {
      const treeint::Subset s{0, 1};
      r.scores.add(s, -2.0 * r.scores.get(s));
    }
    return r;
  };
  return treeint::cli::main_entry(argc, argv, hooks);
}
