#ifndef TREEINT_CLI_INSTANCES_H_
#define TREEINT_CLI_INSTANCES_H_

#include <string>
#include <string_view>
#include <vector>

#include "treeint/treemodel.h"

namespace treeint::cli {

// Feature names from the model, or x0, x1, ... when it has none.
std::vector<std::string> feature_labels(const Ensemble& ensemble);

// One instance per line, comma-separated. An optional header row names the
// columns; columns are then reordered to match the model's features.
std::vector<std::vector<double>> parse_instances_csv(std::string_view text,
                                                     const Ensemble& ensemble);

std::vector<double> parse_instance_inline(std::string_view text,
                                          const Ensemble& ensemble);

// Reads `path` if nonempty, else parses `inline_values`. Throws InputError
// if neither is given.
std::vector<std::vector<double>> load_instances(const std::string& path,
                                                const std::string& inline_values,
                                                const Ensemble& ensemble);

}  // namespace treeint::cli

#endif  // TREEINT_CLI_INSTANCES_H_
