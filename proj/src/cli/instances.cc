#include "cli/instances.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "treeint/error.h"

namespace treeint::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view token, double& value) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<double> parse_row(const std::vector<std::string_view>& fields,
                              std::size_t line_no) {
  std::vector<double> row;
  row.reserve(fields.size());
  for (std::string_view f : fields) {
    double v = 0.0;
    if (!parse_number(f, v)) {
      throw InputError("line " + std::to_string(line_no) + ": \"" +
                       std::string(f) + "\" is not a number");
    }
    if (!std::isfinite(v)) {
      throw InputError("line " + std::to_string(line_no) +
                       ": non-finite feature value");
    }
    row.push_back(v);
  }
  return row;
}

}  // namespace

std::vector<std::string> feature_labels(const Ensemble& ensemble) {
  if (!ensemble.feature_names.empty()) return ensemble.feature_names;
  std::vector<std::string> out;
  for (int i = 0; i < ensemble.n_features; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

std::vector<std::vector<double>> parse_instances_csv(std::string_view text,
                                                     const Ensemble& ensemble) {
  const std::size_t n = ensemble.n_features;
  std::vector<std::vector<double>> rows;
  // column_of[k] = model feature filled from CSV column k.
  std::vector<std::size_t> column_of;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != n) {
      throw InputError("line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, model has " +
                       std::to_string(n) + " features");
    }
    if (first) {
      first = false;
      double probe = 0.0;
      bool header = false;
      for (std::string_view f : fields) header = header || !parse_number(f, probe);
      if (header) {
        const auto labels = feature_labels(ensemble);
        std::map<std::string, std::size_t, std::less<>> index;
        for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
        std::vector<char> used(n, 0);
        for (std::string_view f : fields) {
          const auto it = index.find(f);
          if (it == index.end()) {
            throw InputError("header column \"" + std::string(f) +
                             "\" is not a model feature");
          }
          if (used[it->second]) {
            throw InputError("header column \"" + std::string(f) +
                             "\" appears twice");
          }
          used[it->second] = 1;
          column_of.push_back(it->second);
        }
        continue;
      }
    }
    std::vector<double> values = parse_row(fields, line_no);
    if (column_of.empty()) {
      rows.push_back(std::move(values));
      continue;
    }
    std::vector<double> row(n);
    for (std::size_t k = 0; k < n; ++k) row[column_of[k]] = values[k];
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("no instances found");
  return rows;
}

std::vector<double> parse_instance_inline(std::string_view text,
                                          const Ensemble& ensemble) {
  const auto fields = split_fields(trim(text));
  if (fields.size() != static_cast<std::size_t>(ensemble.n_features)) {
    throw InputError("instance has " + std::to_string(fields.size()) +
                     " values, model has " +
                     std::to_string(ensemble.n_features) + " features");
  }
  return parse_row(fields, 1);
}

std::vector<std::vector<double>> load_instances(const std::string& path,
                                                const std::string& inline_values,
                                                const Ensemble& ensemble) {
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open instances file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instances_csv(buffer.str(), ensemble);
  }
  if (!inline_values.empty()) return {parse_instance_inline(inline_values, ensemble)};
  throw InputError("no instances given (use --instances or --instance)");
}

}  // namespace treeint::cli
