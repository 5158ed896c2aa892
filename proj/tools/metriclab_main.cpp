#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "metriclab/report.hpp"

namespace {

using metriclab::ChainKind;
using metriclab::Command;
using metriclab::GapMode;
using metriclab::RunConfig;

void add_common(CLI::App& sub, RunConfig& config) {
  sub.add_option("--zoo", config.zoo, "Zoo family instead of an input file");
  sub.add_option("--depth", config.depth, "Zoo sample depth")->check(CLI::PositiveNumber);
  sub.add_option("--s", config.s, "Family parameter (s, t or r)");
  sub.add_option("--r1", config.r1, "First radius of product_geometric");
  sub.add_option("--chain", config.chain, "Chain: auto, dendrogram or ball")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, ChainKind>{{"auto", ChainKind::kAuto},
                                           {"dendrogram", ChainKind::kDendrogram},
                                           {"ball", ChainKind::kBall}},
          CLI::ignore_case));
  sub.add_option("--p", config.p, "Witness exponent p > 1");
  sub.add_option("--epsilon", config.epsilon, "Tolerance epsilon > 0");
  sub.add_option("--snowflake", config.snowflake, "Replace d by d^s, s in (0, 1]");
  sub.add_flag("--rescale", config.rescale, "Divide by the diameter when it exceeds 1");
  sub.add_option("--threads", config.threads, "Worker thread bound");
  sub.add_option("--out", config.out_dir, "Directory for report files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logarithmic-ratio analysis of finite metric spaces"};
  app.require_subcommand(1);
  RunConfig config;

  const std::map<std::string, Command> commands{
      {"profile", Command::kProfile},       {"ultrametrize", Command::kUltrametrize},
      {"embed", Command::kEmbed},           {"dimension", Command::kDimension},
      {"zoo", Command::kZoo},               {"product", Command::kProduct},
      {"hyperspace", Command::kHyperspace}, {"gap-bounds", Command::kGapBounds},
      {"oracle", Command::kOracle},
  };
  const std::map<std::string, std::string> help{
      {"profile", "R-sequence, running liminf and chain classification"},
      {"ultrametrize", "Ultrametric from a chain with its bi-Holder certificate"},
      {"embed", "Box-norm embedding into R^N with packing audit"},
      {"dimension", "Metric dimension estimate over a window"},
      {"zoo", "Sample a closed-form family with its exact level table"},
      {"product", "Sup-metric product of the input spaces"},
      {"hyperspace", "Hausdorff hyperspace of nonempty subsets"},
      {"gap-bounds", "g(r) and G(r) bounds on the ratio"},
      {"oracle", "Brute-force minimum of R over all partitions"},
  };

  for (const auto& [name, command] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("inputs", config.inputs, "Input space files (.csv or .json)");
    add_common(*sub, config);
    switch (command) {
      case Command::kEmbed:
        sub->add_option("--N", config.N, "Target dimension");
        sub->add_option("--D", config.D, "Metric dimension bound used when --N is absent");
        sub->add_option("--margin", config.s_margin, "Margin s of the dimension bound");
        break;
      case Command::kDimension:
        sub->add_option("--window-r", config.window_r, "Largest r1");
        sub->add_option("--window-t", config.window_t, "Least r1/r2");
        sub->add_option("--grid-base", config.grid_base, "Radii are base^-k");
        sub->add_option("--grid-levels", config.grid_levels, "Number of grid radii");
        sub->add_option("--max-centres", config.max_centres, "Ball centres to try");
        break;
      case Command::kHyperspace:
        sub->add_option("--max-subset", config.max_subset, "Largest subset size (0 = all)");
        break;
      case Command::kGapBounds:
        sub->add_option("--radii", config.radii, "Radii r (default: chain diameters)");
        sub->add_option("--mode", config.gap_mode, "auto, exact or heuristic")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, GapMode>{{"auto", GapMode::kAuto},
                                               {"exact", GapMode::kExact},
                                               {"heuristic", GapMode::kHeuristic}},
                CLI::ignore_case));
        break;
      case Command::kOracle:
        sub->add_option("--radius", config.radius, "Partitions with diameter below r");
        break;
      default:
        break;
    }
    sub->callback([&config, command = command] { config.command = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return metriclab::run(config, std::cout, std::cerr);
}
