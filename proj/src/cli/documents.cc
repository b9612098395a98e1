#include "cli/documents.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "treeint/error.h"

namespace treeint::cli {

namespace {

const Json& field(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError(std::string("explanation document lacks \"") + key + "\"");
  }
  return *it;
}

std::string label_of(const Subset& subset, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k > 0) out += " x ";
    out += names.at(subset[k]);
  }
  return out;
}

const ExplanationRow& pick_row(const ExplanationDocument& doc, int row) {
  if (row < 0 || row >= static_cast<int>(doc.rows.size())) {
    throw InputError("row " + std::to_string(row) + " not in document (" +
                     std::to_string(doc.rows.size()) + " rows)");
  }
  return doc.rows[row];
}

const InteractionResult* find_order(const ExplanationRow& row, int order) {
  for (const InteractionResult& r : row.results) {
    if (r.order == order) return &r;
  }
  return nullptr;
}

const InteractionResult& require_order(const ExplanationRow& row, int order,
                                       const std::string& kind) {
  const InteractionResult* r = find_order(row, order);
  if (r == nullptr) {
    throw InputError("plot kind " + kind + " requires order " +
                     std::to_string(order) + " scores");
  }
  return *r;
}

struct Bar {
  Subset subset;
  int order;
  double value;
};

// All nonzero scores, sorted by magnitude (ties keep order-then-subset
// sequence).
std::vector<Bar> sorted_bars(const ExplanationRow& row) {
  std::vector<Bar> bars;
  for (const InteractionResult& r : row.results) {
    for (auto& [subset, value] : r.scores.nonzero_entries()) {
      bars.push_back(Bar{subset, r.order, value});
    }
  }
  std::stable_sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
    return std::abs(a.value) > std::abs(b.value);
  });
  return bars;
}

Json bar_json(const Bar& bar, const std::vector<std::string>& names) {
  Json j;
  j["subset"] = subset_json(bar.subset);
  j["label"] = label_of(bar.subset, names);
  j["order"] = bar.order;
  j["value"] = bar.value;
  return j;
}

}  // namespace

Json subset_json(const Subset& subset) {
  Json arr = Json::array();
  for (int f : subset) arr.push_back(f);
  return arr;
}

Json to_json(const ExplanationDocument& doc) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["model_digest"] = doc.model_digest;
  j["index_kind"] = doc.index_kind;
  j["mode"] = doc.mode;
  j["orders"] = doc.orders;
  j["zero_floor"] = doc.zero_floor;
  j["feature_names"] = doc.feature_names;
  Json rows = Json::array();
  for (const ExplanationRow& row : doc.rows) {
    Json r;
    r["instance"] = row.instance;
    r["baseline"] = row.results.empty() ? 0.0 : row.results[0].baseline;
    r["prediction"] = row.results.empty() ? 0.0 : row.results[0].prediction;
    Json scores = Json::array();
    for (const InteractionResult& res : row.results) {
      Json entries = Json::array();
      for (const auto& [subset, value] : res.scores.nonzero_entries()) {
        Json e;
        e["subset"] = subset_json(subset);
        e["value"] = value;
        entries.push_back(std::move(e));
      }
      Json order;
      order["order"] = res.order;
      order["entries"] = std::move(entries);
      scores.push_back(std::move(order));
    }
    r["scores"] = std::move(scores);
    r["efficiency_residual"] = row.efficiency_residual
                                   ? Json(*row.efficiency_residual)
                                   : Json(nullptr);
    rows.push_back(std::move(r));
  }
  j["explanations"] = std::move(rows);
  if (doc.timing) j["timing"] = *doc.timing;
  return j;
}

ExplanationDocument parse_explanation(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed explanation document: ") + e.what());
  }
  try {
    if (field(j, "schema_version").get<int>() != kSchemaVersion) {
      throw InputError("unsupported explanation schema_version");
    }
    ExplanationDocument doc;
    doc.model_digest = field(j, "model_digest").get<std::string>();
    doc.index_kind = field(j, "index_kind").get<std::string>();
    doc.mode = field(j, "mode").get<std::string>();
    doc.orders = field(j, "orders").get<std::vector<int>>();
    doc.zero_floor = field(j, "zero_floor").get<double>();
    doc.feature_names = field(j, "feature_names").get<std::vector<std::string>>();
    const int n = static_cast<int>(doc.feature_names.size());
    if (n == 0) throw InputError("explanation document has no features");
    for (const Json& r : field(j, "explanations")) {
      ExplanationRow row;
      row.instance = field(r, "instance").get<std::vector<double>>();
      const double baseline = field(r, "baseline").get<double>();
      const double prediction = field(r, "prediction").get<double>();
      for (const Json& o : field(r, "scores")) {
        InteractionResult res;
        res.order = field(o, "order").get<int>();
        if (res.order < 1 || res.order > n) {
          throw InputError("score order out of range");
        }
        res.index = doc.index_kind;
        res.baseline = baseline;
        res.prediction = prediction;
        res.scores = ScoreTable(n, res.order);
        for (const Json& e : field(o, "entries")) {
          Subset s = field(e, "subset").get<Subset>();
          if (static_cast<int>(s.size()) != res.order ||
              !std::is_sorted(s.begin(), s.end()) ||
              std::adjacent_find(s.begin(), s.end()) != s.end() ||
              (!s.empty() && (s.front() < 0 || s.back() >= n))) {
            throw InputError("invalid subset in explanation document");
          }
          res.scores.add(s, field(e, "value").get<double>());
        }
        row.results.push_back(std::move(res));
      }
      const Json& residual = field(r, "efficiency_residual");
      if (!residual.is_null()) row.efficiency_residual = residual.get<double>();
      doc.rows.push_back(std::move(row));
    }
    if (const auto it = j.find("timing"); it != j.end()) doc.timing = *it;
    return doc;
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed explanation document: ") + e.what());
  }
}

ExplanationDocument load_explanation(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open explanation file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_explanation(buffer.str());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json plot_payload(const ExplanationDocument& doc, const std::string& kind,
                  int row_index) {
  const ExplanationRow& row = pick_row(doc, row_index);
  const auto& names = doc.feature_names;
  const double baseline = row.results.empty() ? 0.0 : row.results[0].baseline;
  const double prediction = row.results.empty() ? 0.0 : row.results[0].prediction;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["model_digest"] = doc.model_digest;
  j["index_kind"] = doc.index_kind;
  j["row"] = row_index;
  j["baseline"] = baseline;
  j["prediction"] = prediction;

  if (kind == "network") {
    const InteractionResult& first = require_order(row, 1, kind);
    const InteractionResult& second = require_order(row, 2, kind);
    Json vertices = Json::array();
    for (int f = 0; f < static_cast<int>(names.size()); ++f) {
      Json v;
      v["feature"] = f;
      v["label"] = names[f];
      v["value"] = first.scores.get(Subset{f});
      vertices.push_back(std::move(v));
    }
    Json edges = Json::array();
    for (const auto& [subset, value] : second.scores.nonzero_entries()) {
      Json e;
      e["source"] = subset[0];
      e["target"] = subset[1];
      e["label"] = label_of(subset, names);
      e["value"] = value;
      edges.push_back(std::move(e));
    }
    j["vertices"] = std::move(vertices);
    j["edges"] = std::move(edges);
    return j;
  }

  if (kind == "force" || kind == "waterfall") {
    if (row.results.empty()) throw InputError("row has no scores");
    const std::vector<Bar> bars = sorted_bars(row);
    Json out = Json::array();
    double positive = 0.0;
    double negative = 0.0;
    double running = baseline;
    for (const Bar& bar : bars) {
      Json b = bar_json(bar, names);
      if (kind == "waterfall") {
        b["start"] = running;
        running += bar.value;
        b["end"] = running;
      }
      (bar.value > 0.0 ? positive : negative) += bar.value;
      out.push_back(std::move(b));
    }
    j["positive_total"] = positive;
    j["negative_total"] = negative;
    j["bars"] = std::move(out);
    j["residual"] = baseline + positive + negative - prediction;
    return j;
  }

  if (kind == "nsii-stacks") {
    if (row.results.empty()) throw InputError("row has no scores");
    for (std::size_t k = 0; k < row.results.size(); ++k) {
      if (row.results[k].order != static_cast<int>(k) + 1) {
        throw InputError("plot kind nsii-stacks requires orders 1.." +
                         std::to_string(row.results.size()) + " with order " +
                         std::to_string(k + 1) + " present");
      }
    }
    Json features = Json::array();
    for (const FeatureStack& stack : nsii_feature_distribution(row.results)) {
      Json f;
      f["feature"] = stack.feature;
      f["label"] = names[stack.feature];
      Json orders = Json::array();
      for (const OrderMass& m : stack.orders) {
        Json o;
        o["order"] = m.order;
        o["positive"] = m.positive;
        o["negative"] = m.negative;
        orders.push_back(std::move(o));
      }
      f["stacks"] = std::move(orders);
      f["total"] = stack.total();
      features.push_back(std::move(f));
    }
    j["max_order"] = static_cast<int>(row.results.size());
    j["features"] = std::move(features);
    return j;
  }

  throw InputError("unknown plot kind \"" + kind +
                   "\" (expected network, force, waterfall or nsii-stacks)");
}

}  // namespace treeint::cli
