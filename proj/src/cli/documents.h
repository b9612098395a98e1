#ifndef TREEINT_CLI_DOCUMENTS_H_
#define TREEINT_CLI_DOCUMENTS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "treeint/engine.h"

namespace treeint::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ExplanationRow {
  std::vector<double> instance;
  // One result per order, ascending.
  std::vector<InteractionResult> results;
  // Present when the orders form a complete efficient set.
  std::optional<double> efficiency_residual;
};

struct ExplanationDocument {
  std::string model_digest;
  std::string index_kind;
  // "order" (single order) or "max-order" (n-SII orders 1..K).
  std::string mode;
  std::vector<int> orders;
  double zero_floor = kZeroFloor;
  std::vector<std::string> feature_names;
  std::vector<ExplanationRow> rows;
  std::optional<Json> timing;
};

Json to_json(const ExplanationDocument& doc);
ExplanationDocument parse_explanation(std::string_view text);
ExplanationDocument load_explanation(const std::string& path);

// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

Json subset_json(const Subset& subset);

// Plot payload for one row of an explanation. Throws InputError when the
// document lacks an order the kind needs.
Json plot_payload(const ExplanationDocument& doc, const std::string& kind,
                  int row);

}  // namespace treeint::cli

#endif  // TREEINT_CLI_DOCUMENTS_H_
