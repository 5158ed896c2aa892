#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "metriclab/io.hpp"

namespace metriclab {

enum class Command {
  kProfile,
  kUltrametrize,
  kEmbed,
  kDimension,
  kZoo,
  kProduct,
  kHyperspace,
  kGapBounds,
  kOracle,
};

const char* to_string(Command command);
std::optional<Command> parse_command(std::string_view name);

enum class ChainKind { kAuto, kDendrogram, kBall };

struct RunConfig {
  Command command = Command::kProfile;
  std::vector<std::string> inputs;
  // Family name; replaces the input file.
  std::string zoo;
  std::size_t depth = 10;
  // Family parameter (s, t or r) and the product family's first radius.
  std::optional<double> s;
  std::optional<double> r1;
  ChainKind chain = ChainKind::kAuto;
  double p = 2.0;
  std::optional<double> epsilon;
  std::optional<std::size_t> N;
  // Dimension bound inputs for embed when N is not given.
  std::optional<double> D;
  std::optional<double> s_margin;
  double snowflake = 1.0;
  bool rescale = false;
  // dimension
  double window_r = 1.0;
  double window_t = 1.0;
  double grid_base = 2.0;
  std::size_t grid_levels = 24;
  std::size_t max_centres = 64;
  // hyperspace
  std::size_t max_subset = 0;
  // gap-bounds and oracle
  std::vector<double> radii;
  GapMode gap_mode = GapMode::kAuto;
  double radius = 1.0;
  std::size_t threads = 1;
  // Directory for report files; empty writes the JSON report to the output stream.
  std::string out_dir;
};

// Throws ParameterError on values outside their domains.
void validate_config(const RunConfig& config);

Json config_to_json(const RunConfig& config);

// The report of a command. Throws DomainError or VerificationError.
Json execute(const RunConfig& config);

// execute() plus output files and exit status: 0 success, 1 domain or I/O
// error, 2 verification failure. Messages go to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace metriclab
