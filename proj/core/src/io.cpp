#include "metriclab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

namespace metriclab {

namespace {

struct Field {
  std::string text;
  std::size_t column = 1;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<Field> split_csv(const std::string& line, const std::string& source,
                             std::size_t line_no) {
  std::vector<Field> fields;
  std::size_t i = 0;
  while (true) {
    Field f;
    f.column = i + 1;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && line[i] == '"') {
      const std::size_t open = i;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            f.text += '"';
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        f.text += line[i++];
      }
      if (!closed) throw ParseError(source, line_no, open + 1, "unterminated quoted field");
      while (i < line.size() && line[i] != ',') {
        if (line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
          throw ParseError(source, line_no, i + 1, "text after closing quote");
        }
        ++i;
      }
    } else {
      const std::size_t start = i;
      while (i < line.size() && line[i] != ',') ++i;
      f.text = trim(std::string_view(line).substr(start, i - start));
    }
    fields.push_back(std::move(f));
    if (i >= line.size()) break;
    ++i;
  }
  return fields;
}

std::optional<double> parse_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && s == trim(s) && !s.empty()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

Json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

Json numbers(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

Json pair_json(const std::array<std::size_t, 2>& p) { return Json::array({p[0], p[1]}); }

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

FiniteMetricSpace read_space_csv(std::istream& in, const std::string& source,
                                 const ValidateOptions& options) {
  struct Row {
    std::vector<Field> fields;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    rows.push_back({split_csv(line, source, line_no), line_no});
  }
  if (rows.empty()) throw ParseError(source, line_no + 1, 1, "no matrix rows");

  // n data rows have n or n + 1 fields (the latter with a row label), and a
  // header adds one row of n labels, optionally after a corner cell.
  const auto& first = rows.front().fields;
  const bool first_numeric = parse_number(first.front().text).has_value();
  const bool all_text = std::none_of(first.begin(), first.end(), [](const Field& f) {
    return parse_number(f.text).has_value();
  });
  std::vector<std::string> labels;
  std::size_t skip = 0;
  if (!first_numeric && rows.size() == first.size()) {
    for (std::size_t k = 1; k < first.size(); ++k) labels.push_back(first[k].text);
    skip = 1;
  } else if (all_text && rows.size() == first.size() + 1) {
    for (const auto& f : first) labels.push_back(f.text);
    skip = 1;
  }
  const std::size_t n = rows.size() - skip;
  if (n == 0) throw ParseError(source, rows.front().line_no, 1, "no matrix rows");
  // Without a header a numeric first cell is data, not a label.
  const bool labelled_rows = rows[skip].fields.size() == n + 1 && (skip == 1 || !first_numeric);

  Matrix matrix;
  std::vector<std::string> row_labels;
  for (std::size_t r = skip; r < rows.size(); ++r) {
    const auto& [fields, row_line] = rows[r];
    if (fields.size() != n + (labelled_rows ? 1 : 0)) {
      throw ParseError(source, row_line, fields.back().column,
                       "row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n + (labelled_rows ? 1 : 0)));
    }
    std::size_t start = 0;
    if (labelled_rows) {
      row_labels.push_back(fields.front().text);
      start = 1;
    }
    std::vector<double> values;
    for (std::size_t k = start; k < fields.size(); ++k) {
      const auto v = parse_number(fields[k].text);
      if (!v) {
        throw ParseError(source, row_line, fields[k].column,
                         "not a number: '" + fields[k].text + "'");
      }
      values.push_back(*v);
    }
    matrix.push_back(std::move(values));
  }
  if (labels.empty()) labels = std::move(row_labels);
  return validate(matrix, std::move(labels), options);
}

FiniteMetricSpace read_space_json(std::istream& in, const std::string& source,
                                  const ValidateOptions& options) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [l, c] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(source, l, c, "invalid JSON");
  }
  if (!doc.is_object()) throw ParseError(source, 1, 1, "expected a JSON object");
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    for (const auto& l : doc.at("labels")) {
      if (!l.is_string()) throw ParseError(source, 1, 1, "labels must be strings");
      labels.push_back(l.get<std::string>());
    }
  }
  const bool log_scale = doc.contains("log_dist");
  const char* key = log_scale ? "log_dist" : "dist";
  if (!doc.contains(key)) throw ParseError(source, 1, 1, "missing \"dist\" or \"log_dist\"");
  Matrix matrix;
  for (const auto& row : doc.at(key)) {
    if (!row.is_array()) throw ParseError(source, 1, 1, std::string(key) + " rows must be arrays");
    std::vector<double> values;
    for (const auto& v : row) {
      if (v.is_null() && log_scale) {
        values.push_back(-kInfinity);
      } else if (v.is_number()) {
        values.push_back(v.get<double>());
      } else {
        throw ParseError(source, 1, 1, std::string(key) + " entries must be numbers");
      }
    }
    matrix.push_back(std::move(values));
  }
  return log_scale ? validate_log(matrix, std::move(labels), options)
                   : validate(matrix, std::move(labels), options);
}

FiniteMetricSpace load_space(const std::string& path, const ValidateOptions& options) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? read_space_json(in, path, options) : read_space_csv(in, path, options);
}

void write_space_csv(std::ostream& out, const FiniteMetricSpace& space) {
  space.require_representable("CSV output");
  const std::size_t n = space.size();
  out << "point";
  for (const auto& l : space.labels()) out << ',' << quote_csv(l);
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << quote_csv(space.label(i));
    for (std::size_t j = 0; j < n; ++j) out << ',' << format_number(space.distance(i, j));
    out << '\n';
  }
}

Json space_to_json(const FiniteMetricSpace& space) {
  Json j;
  j["labels"] = space.labels();
  const std::size_t n = space.size();
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < n; ++k) {
      row.push_back(space.log_backed() ? number(space.log_distance(i, k))
                                       : Json(space.distance(i, k)));
    }
    rows.push_back(std::move(row));
  }
  j[space.log_backed() ? "log_dist" : "dist"] = std::move(rows);
  return j;
}

void write_coords_csv(std::ostream& out, std::span<const std::string> labels,
                      const std::vector<std::vector<double>>& coords) {
  const std::size_t N = coords.empty() ? 0 : coords.front().size();
  out << "point";
  for (std::size_t k = 0; k < N; ++k) out << ",x" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < coords.size(); ++i) {
    out << quote_csv(i < labels.size() ? labels[i] : std::to_string(i));
    for (double x : coords[i]) out << ',' << format_number(x);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Json& json) { out << json.dump(2) << '\n'; }

Json to_json(const PartitionStats& s) {
  return Json{{"delta", number(s.delta)},         {"gamma", number(s.gamma)},
              {"log_delta", number(s.log_delta)}, {"log_gamma", number(s.log_gamma)},
              {"R", number(s.log_ratio)},         {"cardinality", s.cardinality}};
}

Json to_json(const Partition& partition) { return Json(partition.blocks()); }

Json to_json(const PartitionChain& chain, bool with_blocks) {
  Json levels = Json::array();
  for (std::size_t l = 0; l < chain.size(); ++l) {
    Json level = to_json(chain.stats[l]);
    level["level"] = l;
    if (chain.has_thresholds()) {
      level["threshold"] = number(chain.thresholds[l]);
      level["log_threshold"] = number(chain.log_thresholds[l]);
    }
    if (with_blocks) level["blocks"] = to_json(chain.levels[l]);
    levels.push_back(std::move(level));
  }
  return Json{{"levels", std::move(levels)}};
}

Json to_json(const ChainClassReport& r) {
  return Json{{"p", r.p},
              {"is_refining", r.is_refining},
              {"delta_monotone", r.delta_monotone},
              {"delta_strictly_decreasing", r.delta_strictly_decreasing},
              {"p_witness", number(r.p_witness)},
              {"log_p_witness", number(r.log_p_witness)},
              {"p_witness_level", r.p_witness_level},
              {"R", numbers(r.R_sequence)},
              {"R_running_liminf", numbers(r.R_running_liminf)},
              {"R_liminf_estimate", number(r.R_liminf_estimate)},
              {"gamma_vs_delta", r.dichotomy_flags}};
}

Json to_json(const LogRatioProfile& p) {
  Json levels = Json::array();
  for (std::size_t l = 0; l < p.levels.size(); ++l) {
    const auto& lv = p.levels[l];
    levels.push_back(Json{{"n", lv.n},
                          {"delta", number(lv.delta)},
                          {"gamma", number(lv.gamma)},
                          {"log_delta", number(lv.log_delta)},
                          {"log_gamma", number(lv.log_gamma)},
                          {"R", number(lv.R)},
                          {"informative", lv.informative},
                          {"running_liminf", number(p.running_liminf[l])}});
  }
  Json j{{"levels", std::move(levels)},
         {"estimate", number(p.estimate)},
         {"finite_fallback", p.finite_fallback},
         {"epsilon", p.epsilon}};
  j["burn_in"] = p.burn_in ? Json(*p.burn_in) : Json(nullptr);
  j["exact_limit"] = p.exact_limit ? number(*p.exact_limit) : Json(nullptr);
  if (p.exact_limit && std::isinf(*p.exact_limit)) j["exact_limit"] = "inf";
  j["property6_hypotheses"] =
      Json{{"delta_strictly_decreasing", p.property6.delta_strictly_decreasing},
           {"gap_evaluated", p.property6.gap_evaluated},
           {"C", number(p.property6.C)},
           {"worst_level", p.property6.worst_level},
           {"holds", p.property6.holds()}};
  return j;
}

Json to_json(const GapBounds& b) {
  Json rows = Json::array();
  for (const auto& r : b.rows) {
    rows.push_back(Json{{"r", number(r.r)},
                        {"log_r", number(r.log_r)},
                        {"g", number(r.g)},
                        {"G", number(r.G)},
                        {"log_g", number(r.log_g)},
                        {"log_G", number(r.log_G)},
                        {"lower_ratio", number(r.lower_ratio)},
                        {"upper_ratio", number(r.upper_ratio)}});
  }
  return Json{{"rows", std::move(rows)},
              {"G_upper_bound_only", b.G_upper_bound_only},
              {"lower_estimate", number(b.lower_estimate)},
              {"upper_estimate", number(b.upper_estimate)}};
}

Json to_json(const BruteForceResult& r) {
  return Json{{"min_R", number(r.min_R)},
              {"witness", to_json(r.witness)},
              {"witness_stats", to_json(r.witness_stats)},
              {"partitions_seen", r.partitions_seen},
              {"partitions_qualifying", r.partitions_qualifying}};
}

Json to_json(const UltrametricCertificate& c, bool with_matrix) {
  Json j{{"p", c.p},
         {"epsilon", c.epsilon},
         {"R_est", number(c.R_est)},
         {"m_index", c.m_index},
         {"root_prepended", c.root_prepended},
         {"upper_sandwich_skipped", c.upper_sandwich_skipped},
         {"a", number(c.a)},
         {"log_a", number(c.log_a)},
         {"K", number(c.K)},
         {"log_K", number(c.log_K)},
         {"exponent", c.exponent},
         {"lower_residual", number(c.lower_residual)},
         {"log_lower_residual", number(c.log_lower_residual)},
         {"lower_worst", pair_json(c.lower_worst)},
         {"upper_residual", number(c.upper_residual)},
         {"log_upper_residual", number(c.log_upper_residual)},
         {"upper_worst", pair_json(c.upper_worst)},
         {"lower_holds", c.lower_holds},
         {"upper_holds", c.upper_holds}};
  if (with_matrix) j["rho"] = space_to_json(c.rho);
  return j;
}

Json to_json(const HolderFit& f) {
  return Json{{"s", number(f.s)},
              {"t", number(f.t)},
              {"c1", number(f.c1)},
              {"c2", number(f.c2)},
              {"pairs_used", f.pairs_used}};
}

Json to_json(const LevelAudit& a) {
  return Json{{"level", a.level},
              {"required", a.required},
              {"per_axis", a.per_axis},
              {"per_axis_used", a.per_axis_used},
              {"capacity", number(a.capacity)},
              {"pitch", number(a.pitch)},
              {"parent_radius", number(a.parent_radius)},
              {"child_radius", number(a.child_radius)},
              {"gamma_next", number(a.gamma_next)},
              {"realized_gap", number(a.realized_gap)},
              {"nested", a.nested},
              {"commutes", a.commutes},
              {"free_placement", a.free_placement},
              {"passes", a.passes()}};
}

Json to_json(const EmbeddingResult& r) {
  Json audit = Json::array();
  for (const auto& a : r.audit) audit.push_back(to_json(a));
  return Json{{"N", r.N},
              {"p", r.p},
              {"R_est", number(r.R_est)},
              {"epsilon", r.epsilon},
              {"a", number(r.a)},
              {"log_a", number(r.log_a)},
              {"burn_in", r.burn_in},
              {"normalization", number(r.normalization)},
              {"fitted", to_json(r.fitted)},
              {"audits_pass", r.audits_pass()},
              {"audit", std::move(audit)},
              {"warnings", r.warnings}};
}

Json to_json(const DistortionReport& r) {
  return Json{{"pairs", r.pairs},
              {"pairs_asserted", r.pairs_asserted},
              {"burn_in", r.burn_in},
              {"target_exponent", number(r.target_exponent)},
              {"fitted", to_json(r.fitted)},
              {"box_sandwich_ok", r.box_sandwich_ok},
              {"lower_ok", r.lower_ok},
              {"upper_ok", r.upper_ok},
              {"worst_lower", number(r.worst_lower)},
              {"worst_upper", number(r.worst_upper)},
              {"worst_lower_pair", pair_json(r.worst_lower_pair)},
              {"worst_upper_pair", pair_json(r.worst_upper_pair)},
              {"early_failures", r.early_failures},
              {"holds", r.holds()}};
}

Json to_json(const DimensionEstimate& e) {
  Json samples = Json::array();
  for (const auto& s : e.samples) {
    samples.push_back(Json{{"r1", number(s.r1)},
                           {"r2", number(s.r2)},
                           {"J", s.J},
                           {"centre", s.centre},
                           {"value", number(s.value)}});
  }
  return Json{{"window", Json{{"r", number(e.window.r)}, {"t", number(e.window.t)}}},
              {"estimate", number(e.estimate)},
              {"samples", std::move(samples)}};
}

Json to_json(const FormulaLevel& l) {
  return Json{{"n", l.n},
              {"delta", number(l.delta)},
              {"gamma", number(l.gamma)},
              {"log_delta", number(l.log_delta)},
              {"log_gamma", number(l.log_gamma)},
              {"R", number(l.R)},
              {"cardinality", l.cardinality}};
}

Json to_json(const AnalyticFamily& f) {
  Json j{{"kind", to_string(f.kind())}, {"name", f.name()}};
  j["param"] = number(f.param());
  if (f.kind() == FamilyKind::kProductGeometric) j["r1"] = f.base();
  j["exact_R"] = std::isinf(f.exact_R()) ? Json("inf") : Json(f.exact_R());
  j["standing_hypothesis"] = f.standing_hypothesis();
  if (const auto n = f.standing_hypothesis_failure()) j["standing_hypothesis_fails_at"] = *n;
  return j;
}

}  // namespace metriclab
