#include "cli/app.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "treeint/error.h"

namespace treeint::cli {

int guarded(Io io, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SingularPointError& e) {
    io.err << "treeint: numeric failure: " << e.what() << "\n";
    return kExitSingular;
  } catch (const LimitError& e) {
    io.err << "treeint: limit exceeded: " << e.what() << "\n";
    return kExitLimit;
  } catch (const InputError& e) {
    io.err << "treeint: input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    io.err << "treeint: error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
}

GridKind parse_grid(const std::string& name) {
  if (name == "unit") return GridKind::kUnitInterval;
  if (name == "chebyshev") return GridKind::kChebyshev;
  throw InputError("unknown grid \"" + name + "\"");
}

InteractionResult call_explain(const Hooks& hooks, const Explainer& explainer,
                               std::span<const double> x,
                               const ExplainConfig& config) {
  if (hooks.explain) return hooks.explain(explainer, x, config);
  return explainer.explain(x, config);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void emit(const std::string& text, const std::string& path, bool to_stdout,
          Io io) {
  if (!path.empty()) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw InputError("cannot write " + path);
      out << text;
      if (!out) throw InputError("cannot write " + path);
    }
    std::filesystem::rename(tmp, path);
  }
  if (path.empty() || to_stdout) io.out << text << std::flush;
}

namespace {

void add_output_flags(CLI::App* cmd, std::string& out, bool& to_stdout) {
  cmd->add_option("--out", out, "Write the document to this path");
  cmd->add_flag("--stdout", to_stdout,
                "Write the document to standard output (default without --out)");
}

}  // namespace

int run(const std::vector<std::string>& args, Io io, const Hooks& hooks) {
  CLI::App app{"Exact Shapley interaction scores for tree ensembles", "treeint"};
  app.require_subcommand(1);

  ExplainOptions explain;
  int explain_order = 0;
  int explain_max_order = 0;
  auto* ex = app.add_subcommand("explain", "Explain instances");
  ex->add_option("--model", explain.model, "Interchange model document")->required();
  auto* ex_file = ex->add_option("--instances", explain.instances,
                                 "CSV file, one instance per line");
  auto* ex_inline = ex->add_option("--instance", explain.instance,
                                   "One instance as comma-separated values");
  ex_file->excludes(ex_inline);
  auto* ex_order = ex->add_option("--order", explain_order,
                                  "Single interaction order (default 1)")
                       ->check(CLI::PositiveNumber);
  auto* ex_max = ex->add_option("--max-order", explain_max_order,
                                "n-SII for all orders up to K")
                     ->check(CLI::PositiveNumber);
  ex_order->excludes(ex_max);
  ex->add_option("--index", explain.index, "sii or banzhaf")
      ->check(CLI::IsMember({"sii", "banzhaf"}));
  ex->add_option("--grid", explain.grid, "Interpolation nodes: unit or chebyshev")
      ->check(CLI::IsMember({"unit", "chebyshev"}));
  ex->add_option("--threads", explain.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  ex->add_flag("--timing", explain.timing, "Record wall-clock timing");
  add_output_flags(ex, explain.out, explain.to_stdout);

  VerifyOptions verify;
  int verify_order = 0;
  int verify_max_order = 0;
  auto* ve = app.add_subcommand("verify", "Compare the engine with brute force");
  ve->add_option("--model", verify.model, "Interchange model document")->required();
  auto* ve_file = ve->add_option("--instances", verify.instances, "CSV file");
  auto* ve_inline = ve->add_option("--instance", verify.instance, "One instance");
  ve_file->excludes(ve_inline);
  ve->add_option("--random", verify.random_instances,
                 "Random instances when none are given")
      ->check(CLI::PositiveNumber);
  auto* ve_order = ve->add_option("--order", verify_order, "Single order")
                       ->check(CLI::PositiveNumber);
  auto* ve_max = ve->add_option("--max-order", verify_max_order,
                                "Orders 1..K (default min(3, n))")
                     ->check(CLI::PositiveNumber);
  ve_order->excludes(ve_max);
  ve->add_option("--index", verify.index, "sii or banzhaf")
      ->check(CLI::IsMember({"sii", "banzhaf"}));
  ve->add_option("--grid", verify.grid, "Interpolation nodes: unit or chebyshev")
      ->check(CLI::IsMember({"unit", "chebyshev"}));
  ve->add_option("--seed", verify.seed, "Seed for instances and enumeration order");
  ve->add_option("--tolerance", verify.tolerance, "Relative tolerance")
      ->check(CLI::PositiveNumber);
  ve->add_option("--threads", verify.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  add_output_flags(ve, verify.out, verify.to_stdout);

  BenchOptions bench;
  auto* be = app.add_subcommand("bench", "Time the engine on synthetic trees");
  be->add_option("--n-features", bench.n_features, "Feature counts")
      ->delimiter(',');
  be->add_option("--depth", bench.depths, "Maximum tree depths")->delimiter(',');
  be->add_option("--leaves", bench.leaves, "Leaf counts")->delimiter(',');
  be->add_option("--orders", bench.orders, "Interaction orders")->delimiter(',');
  be->add_option("--trees", bench.trees, "Trees per ensemble")
      ->check(CLI::PositiveNumber);
  be->add_option("--repetitions", bench.repetitions, "Timed repetitions")
      ->check(CLI::PositiveNumber);
  be->add_option("--instances", bench.instances, "Instances per repetition")
      ->check(CLI::PositiveNumber);
  be->add_flag("--naive", bench.naive, "Also time the brute-force oracle");
  be->add_option("--seed", bench.seed, "Generator seed");
  add_output_flags(be, bench.out, bench.to_stdout);

  PlotOptions plot;
  auto* pl = app.add_subcommand("plot-data", "Plot-ready data from an explanation");
  pl->add_option("--explanation", plot.explanation, "Explanation document")
      ->required();
  pl->add_option("--kind", plot.kind, "network, force, waterfall or nsii-stacks")
      ->required();
  pl->add_option("--row", plot.row, "Explanation row")->check(CLI::NonNegativeNumber);
  add_output_flags(pl, plot.out, plot.to_stdout);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "treeint: " << e.what() << "\n";
    return kExitInputError;
  }

  if (ex->parsed()) {
    if (ex_order->count() > 0) explain.order = explain_order;
    if (ex_max->count() > 0) explain.max_order = explain_max_order;
    return cmd_explain(explain, io, hooks);
  }
  if (ve->parsed()) {
    if (ve_order->count() > 0) verify.order = verify_order;
    if (ve_max->count() > 0) verify.max_order = verify_max_order;
    return cmd_verify(verify, io, hooks);
  }
  if (be->parsed()) return cmd_bench(bench, io);
  return cmd_plot_data(plot, io);
}

int main_entry(int argc, char** argv, const Hooks& hooks) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, Io{std::cout, std::cerr}, hooks);
}

}  // namespace treeint::cli
