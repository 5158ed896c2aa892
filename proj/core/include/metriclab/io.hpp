#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metriclab/embedding.hpp"
#include "metriclab/logratio.hpp"
#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"
#include "metriclab/ultrametric.hpp"
#include "metriclab/zoo.hpp"

namespace metriclab {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// %.17g
std::string format_number(double value);

// A square matrix, optionally with a header row of labels (first cell is a
// corner name) and a label in the first cell of each row. Fields may be
// double-quoted. Blank lines and lines starting with '#' are skipped.
// Throws ParseError with line and column, or MetricViolation.
FiniteMetricSpace read_space_csv(std::istream& in, const std::string& source,
                                 const ValidateOptions& options = {});

// {"labels": [...], "dist": [[...]]} or {"labels": [...], "log_dist": [[...]]}
// with null for -inf.
FiniteMetricSpace read_space_json(std::istream& in, const std::string& source,
                                  const ValidateOptions& options = {});

// By extension: .json, anything else is CSV.
FiniteMetricSpace load_space(const std::string& path, const ValidateOptions& options = {});

// Header row then one labelled row per point. Log-backed spaces with
// underflowing values are refused; use space_to_json.
void write_space_csv(std::ostream& out, const FiniteMetricSpace& space);
Json space_to_json(const FiniteMetricSpace& space);

void write_coords_csv(std::ostream& out, std::span<const std::string> labels,
                      const std::vector<std::vector<double>>& coords);

// Pretty-printed with a trailing newline.
void write_json(std::ostream& out, const Json& json);

Json to_json(const PartitionStats& stats);
Json to_json(const Partition& partition);
Json to_json(const PartitionChain& chain, bool with_blocks = true);
Json to_json(const ChainClassReport& report);
Json to_json(const LogRatioProfile& profile);
Json to_json(const GapBounds& bounds);
Json to_json(const BruteForceResult& result);
Json to_json(const UltrametricCertificate& cert, bool with_matrix = false);
Json to_json(const HolderFit& fit);
Json to_json(const LevelAudit& audit);
Json to_json(const EmbeddingResult& result);
Json to_json(const DistortionReport& report);
Json to_json(const DimensionEstimate& estimate);
Json to_json(const FormulaLevel& level);
Json to_json(const AnalyticFamily& family);

}  // namespace metriclab
