#include "cli/app.h"
#include "cli/documents.h"

namespace treeint::cli {

int cmd_plot_data(const PlotOptions& options, Io io) {
  return guarded(io, [&] {
    const ExplanationDocument doc = load_explanation(options.explanation);
    const Json payload = plot_payload(doc, options.kind, options.row);
    emit(dump(payload), options.out, options.to_stdout, io);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace treeint::cli
