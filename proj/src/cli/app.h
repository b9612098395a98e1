#ifndef TREEINT_CLI_APP_H_
#define TREEINT_CLI_APP_H_

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeint/engine.h"

namespace treeint::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitInputError = 2,
  kExitSingular = 3,
  kExitLimit = 4,
};

// Engine entry point used by the commands; replaceable so tests can check
// that `verify` notices a corrupted engine.
using ExplainHook = std::function<InteractionResult(
    const Explainer&, std::span<const double>, const ExplainConfig&)>;

struct Hooks {
  ExplainHook explain;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

struct ExplainOptions {
  std::string model;
  std::string instances;
  std::string instance;
  std::optional<int> order;
  std::optional<int> max_order;
  std::string index = "sii";
  std::string grid = "unit";
  std::string out;
  bool to_stdout = false;
  int threads = 1;
  bool timing = false;
};

struct VerifyOptions {
  std::string model;
  std::string instances;
  std::string instance;
  int random_instances = 5;
  std::optional<int> order;
  std::optional<int> max_order;
  std::string index = "sii";
  std::string grid = "unit";
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  std::string out;
  bool to_stdout = false;
  int threads = 1;
};

struct BenchOptions {
  std::vector<int> n_features{8};
  std::vector<int> depths{12};
  std::vector<int> leaves{64, 128, 256, 512};
  std::vector<int> orders{2};
  int trees = 10;
  int repetitions = 10;
  int instances = 20;
  bool naive = false;
  std::uint64_t seed = 0;
  std::string out;
  bool to_stdout = false;
};

struct PlotOptions {
  std::string explanation;
  std::string kind;
  int row = 0;
  std::string out;
  bool to_stdout = false;
};

int cmd_explain(const ExplainOptions& options, Io io, const Hooks& hooks);
int cmd_verify(const VerifyOptions& options, Io io, const Hooks& hooks);
int cmd_bench(const BenchOptions& options, Io io);
int cmd_plot_data(const PlotOptions& options, Io io);

// Parses arguments (without the program name) and runs one command.
int run(const std::vector<std::string>& args, Io io, const Hooks& hooks = {});

int main_entry(int argc, char** argv, const Hooks& hooks = {});

// Maps library exceptions to exit codes, printing the message to io.err.
int guarded(Io io, const std::function<int()>& body);

// "unit" or "chebyshev".
GridKind parse_grid(const std::string& name);

// Resolves the hook, defaulting to Explainer::explain.
InteractionResult call_explain(const Hooks& hooks, const Explainer& explainer,
                               std::span<const double> x,
                               const ExplainConfig& config);

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

// Writes `text` to `path` (if set) and/or io.out. Without a path the
// document always goes to standard output.
void emit(const std::string& text, const std::string& path, bool to_stdout,
          Io io);

struct TimingStats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Mean and sample standard deviation of fn's wall time over `repetitions`.
TimingStats time_repeated(int repetitions, const std::function<void()>& fn);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace treeint::cli

#endif  // TREEINT_CLI_APP_H_
