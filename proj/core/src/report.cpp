#include "metriclab/report.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace metriclab {

namespace {

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::kProfile, "profile"},       {Command::kUltrametrize, "ultrametrize"},
    {Command::kEmbed, "embed"},           {Command::kDimension, "dimension"},
    {Command::kZoo, "zoo"},               {Command::kProduct, "product"},
    {Command::kHyperspace, "hyperspace"}, {Command::kGapBounds, "gap-bounds"},
    {Command::kOracle, "oracle"},
};

const char* to_string(ChainKind kind) {
  switch (kind) {
    case ChainKind::kDendrogram:
      return "dendrogram";
    case ChainKind::kBall:
      return "ball";
    default:
      return "auto";
  }
}

const char* to_string(GapMode mode) {
  switch (mode) {
    case GapMode::kExact:
      return "exact";
    case GapMode::kHeuristic:
      return "heuristic";
    default:
      return "auto";
  }
}

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

struct Artifact {
  std::string name;
  std::string content;
};

struct Outcome {
  Json report;
  std::vector<Artifact> files;
  std::vector<std::string> failures;
};

struct Subject {
  FiniteMetricSpace space;
  PartitionChain chain;
  std::optional<AnalyticFamily> family;
  std::vector<FormulaLevel> formulas;
  std::string source;
};

double default_param(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kSeqPowerTower:
    case FamilyKind::kProductGeometric:
    case FamilyKind::kCantorFactorial:
      return 0.5;
    case FamilyKind::kSeqPolynomial:
      return 2.0;
    default:
      return 0.0;
  }
}

AnalyticFamily family_of(const RunConfig& config) {
  const auto kind = parse_family_kind(config.zoo);
  if (!kind) throw ParameterError("unknown zoo family '" + config.zoo + "'");
  return make_family(*kind, config.s.value_or(default_param(*kind)), config.r1.value_or(0.5));
}

PartitionChain chain_for(const FiniteMetricSpace& space, ChainKind kind) {
  return kind == ChainKind::kBall ? ball_chain(space) : dendrogram_chain(space);
}

FiniteMetricSpace load_input(const RunConfig& config, const std::string& path) {
  ValidateOptions options;
  options.rescale = config.rescale;
  auto space = load_space(path, options);
  if (config.snowflake != 1.0) space = snowflake(space, config.snowflake);
  return space;
}

Subject load_subject(const RunConfig& config) {
  Subject subject;
  if (!config.zoo.empty()) {
    auto family = family_of(config);
    auto sampled = sample(family, config.depth);
    subject.space = std::move(sampled.space);
    subject.formulas = std::move(sampled.formulas);
    subject.source = "zoo:" + family.name();
    if (config.snowflake != 1.0) {
      subject.space = snowflake(subject.space, config.snowflake);
      if (config.chain == ChainKind::kAuto) {
        subject.chain = make_chain(subject.space, std::move(sampled.chain.levels));
      }
    } else if (config.chain == ChainKind::kAuto) {
      subject.chain = std::move(sampled.chain);
    }
    if (config.chain != ChainKind::kAuto) subject.chain = chain_for(subject.space, config.chain);
    subject.family = std::move(family);
    return subject;
  }
  if (config.inputs.empty()) throw ParameterError("an input file or --zoo is required");
  subject.space = load_input(config, config.inputs.front());
  subject.source = config.inputs.front();
  subject.chain = chain_for(subject.space, config.chain);
  return subject;
}

std::string space_file_name(const FiniteMetricSpace& space, const std::string& stem) {
  return stem + (space.has_underflow() || space.log_backed() ? ".json" : ".csv");
}

Artifact space_artifact(const FiniteMetricSpace& space, const std::string& stem) {
  std::ostringstream os;
  if (space.has_underflow() || space.log_backed()) {
    Json j = space_to_json(space);
    j["schema"] = kSchemaVersion;
    write_json(os, j);
  } else {
    write_space_csv(os, space);
  }
  return {space_file_name(space, stem), os.str()};
}

Json subject_json(const Subject& subject) {
  Json j{{"source", subject.source},
         {"points", subject.space.size()},
         {"log_backed", subject.space.log_backed()},
         {"diameter", subject.space.diameter()},
         {"log_diameter", subject.space.log_diameter()}};
  if (subject.space.rescaled()) j["rescale_factor"] = subject.space.rescale_factor();
  if (subject.family) j["family"] = to_json(*subject.family);
  return j;
}

Json formulas_json(const std::vector<FormulaLevel>& formulas) {
  Json rows = Json::array();
  for (const auto& f : formulas) rows.push_back(to_json(f));
  return rows;
}

// Largest difference between engine and formula values of ln δ, ln γ and R.
double formula_deviation(const PartitionChain& chain, const std::vector<FormulaLevel>& formulas) {
  double worst = 0.0;
  const auto diff = [](double a, double b) {
    if (a == b) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) return kInfinity;
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  };
  for (std::size_t l = 0; l < std::min(chain.size(), formulas.size()); ++l) {
    worst = std::max(worst, diff(chain.stats[l].log_delta, formulas[l].log_delta));
    worst = std::max(worst, diff(chain.stats[l].log_gamma, formulas[l].log_gamma));
    worst = std::max(worst, diff(chain.stats[l].log_ratio, formulas[l].R));
  }
  return worst;
}

ProfileOptions profile_options(const RunConfig& config, const Subject& subject) {
  ProfileOptions options;
  if (config.epsilon) options.epsilon = *config.epsilon;
  if (subject.family) options.exact_limit = subject.family->exact_R();
  return options;
}

Outcome run_profile(const RunConfig& config) {
  const auto subject = load_subject(config);
  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["chain"] = to_json(subject.chain, subject.space.size() <= 64);
  out.report["profile"] =
      to_json(profile(subject.chain, subject.space, profile_options(config, subject)));
  out.report["classification"] = to_json(classify_chain(subject.chain, config.p));
  if (!subject.formulas.empty()) {
    out.report["formulas"] = formulas_json(subject.formulas);
    out.report["formula_deviation"] = formula_deviation(subject.chain, subject.formulas);
  }
  return out;
}

Outcome run_ultrametrize(const RunConfig& config) {
  const auto subject = load_subject(config);
  CertificateOptions options;
  options.p = config.p;
  options.epsilon = config.epsilon.value_or(kDefaultCertificateEpsilon);
  options.strict = false;
  const auto cert = certificate(subject.space, subject.chain, options);
  const auto check = is_ultrametric(cert.rho);
  const auto rho_profile = profile(ball_chain(cert.rho));

  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["certificate"] = to_json(cert);
  out.report["rho_is_ultrametric"] = check.ok;
  const double lower = cert.R_est / (cert.p * (cert.R_est + cert.epsilon));
  out.report["rho_ratio"] = Json{{"lower_bound", lower},
                                 {"estimate", rho_profile.estimate},
                                 {"upper_bound", 1.0}};
  out.files.push_back(space_artifact(cert.rho, "rho"));
  if (!check.ok) out.failures.push_back("rho fails the strong triangle inequality");
  if (!cert.lower_holds) out.failures.push_back("K rho^exponent <= d fails");
  if (!cert.upper_holds) out.failures.push_back("d <= rho fails");
  return out;
}

Outcome run_embed(const RunConfig& config) {
  const auto subject = load_subject(config);
  EmbeddingOptions options;
  options.p = config.p;
  options.epsilon = config.epsilon;
  Json bound = nullptr;
  const double R = profile(subject.chain).estimate;
  options.R_override = R;
  const double s = config.s_margin.value_or(R - 1.0);
  if (config.N) {
    options.N = *config.N;
  } else {
    if (!config.D) throw ParameterError("embed needs --N or --D");
    options.N = min_embedding_dimension(*config.D, R, s);
    bound = Json{{"D", *config.D},
                 {"R", R},
                 {"s", s},
                 {"bound", embedding_dimension_bound(*config.D, R, s)},
                 {"N", options.N}};
  }
  const auto sub = embedding_subchain(subject.space, subject.chain, options.N, s);
  const auto result = embed_chain(subject.space, sub.chain, options);
  DistortionOptions dopts;
  dopts.strict = false;
  const auto distortion = verify_embedding_distortion(subject.space, result, dopts);

  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["dimension_bound"] = bound;
  out.report["levels_used"] = sub.kept;
  out.report["embedding"] = to_json(result);
  out.report["distortion"] = to_json(distortion);
  Json coords = Json::array();
  for (const auto& c : result.coords) coords.push_back(c);
  out.report["coords"] = std::move(coords);
  std::ostringstream os;
  write_coords_csv(os, subject.space.labels(), result.coords);
  out.files.push_back({"coords.csv", os.str()});
  if (!result.audits_pass()) out.failures.push_back("a packing audit failed");
  if (!distortion.box_sandwich_ok) out.failures.push_back("box-norm sandwich fails");
  if (!distortion.lower_ok) out.failures.push_back("lower distortion bound fails");
  if (!distortion.upper_ok) out.failures.push_back("upper distortion bound fails");
  return out;
}

std::vector<std::pair<double, double>> dimension_grid(const RunConfig& config) {
  std::vector<std::pair<double, double>> grid;
  for (std::size_t i = 1; i <= config.grid_levels; ++i) {
    for (std::size_t j = i + 1; j <= config.grid_levels; ++j) {
      grid.emplace_back(std::pow(config.grid_base, -static_cast<double>(i)),
                        std::pow(config.grid_base, -static_cast<double>(j)));
    }
  }
  return grid;
}

Outcome run_dimension(const RunConfig& config) {
  const DimensionWindow window{config.window_r, config.window_t};
  const auto grid = dimension_grid(config);
  DimensionOptions options;
  options.max_centres = config.max_centres;
  Outcome out;
  DimensionEstimate estimate;
  if (!config.zoo.empty() && config.snowflake == 1.0 && config.chain == ChainKind::kAuto) {
    const auto family = family_of(config);
    const auto coords = sample_coordinates(family, config.depth);
    out.report["subject"] = Json{{"source", "zoo:" + family.name()},
                                 {"points", coords.size()},
                                 {"family", to_json(family)}};
    if (family.kind() == FamilyKind::kSqrtUltra) {
      estimate = estimate_metric_dimension(SqrtUltraSpace(coords), window, grid, options);
    } else {
      estimate = estimate_metric_dimension(LineSpace(coords), window, grid, options);
    }
  } else {
    const auto subject = load_subject(config);
    subject.space.require_representable("dimension estimate");
    out.report["subject"] = subject_json(subject);
    estimate = estimate_metric_dimension(subject.space, window, grid, options);
  }
  out.report["dimension"] = to_json(estimate);
  return out;
}

Outcome run_zoo(const RunConfig& config) {
  if (config.zoo.empty()) throw ParameterError("zoo needs a family name");
  const auto subject = load_subject(config);
  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["formulas"] = formulas_json(subject.formulas);
  out.report["chain"] = to_json(subject.chain, subject.space.size() <= 64);
  out.report["formula_deviation"] = formula_deviation(subject.chain, subject.formulas);
  if (config.out_dir.empty()) {
    out.report["space"] = space_to_json(subject.space);
  } else {
    out.files.push_back(space_artifact(subject.space, "space"));
  }
  return out;
}

Outcome run_product(const RunConfig& config) {
  if (config.inputs.size() < 2) throw ParameterError("product needs at least two inputs");
  std::vector<FiniteMetricSpace> factors;
  for (const auto& path : config.inputs) factors.push_back(load_input(config, path));
  const auto product = sup_product(factors, max_points());
  ProfileOptions options;
  if (config.epsilon) options.epsilon = *config.epsilon;
  Json factor_reports = Json::array();
  double max_factor = -kInfinity;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto p = profile(dendrogram_chain(factors[k]), options);
    max_factor = std::max(max_factor, p.estimate);
    factor_reports.push_back(Json{{"source", config.inputs[k]},
                                  {"points", factors[k].size()},
                                  {"estimate", p.estimate}});
  }
  const auto chain = chain_for(product, config.chain);
  const auto p = profile(chain, product, options);
  Outcome out;
  out.report["factors"] = std::move(factor_reports);
  out.report["product"] = Json{{"points", product.size()}, {"profile", to_json(p)}};
  out.report["estimate_at_least_factor_max"] = p.estimate >= max_factor;
  out.files.push_back(space_artifact(product, "product"));
  return out;
}

Outcome run_hyperspace(const RunConfig& config) {
  const auto subject = load_subject(config);
  const std::size_t k = config.max_subset == 0 ? subject.space.size() : config.max_subset;
  const auto hyper = hausdorff_hyperspace(subject.space, k, max_points());
  const auto base_check = is_ultrametric(subject.space);
  const auto hyper_check = is_ultrametric(hyper.space);
  Outcome out;
  out.report["subject"] = subject_json(subject);
  Json members = Json::array();
  for (const auto& h : hyper.points) members.push_back(h.members);
  out.report["hyperspace"] = Json{{"points", hyper.space.size()},
                                  {"max_subset", k},
                                  {"members", std::move(members)},
                                  {"base_is_ultrametric", base_check.ok},
                                  {"is_ultrametric", hyper_check.ok},
                                  {"worst_violation", hyper_check.worst_violation}};
  out.report["profile"] = to_json(profile(dendrogram_chain(hyper.space)));
  out.files.push_back(space_artifact(hyper.space, "hyperspace"));
  if (base_check.ok && !hyper_check.ok) {
    out.failures.push_back("hyperspace of an ultrametric space is not ultrametric");
  }
  return out;
}

Outcome run_gap_bounds(const RunConfig& config) {
  const auto subject = load_subject(config);
  std::vector<double> log_radii;
  if (!config.radii.empty()) {
    for (double r : config.radii) {
      if (!(r > 0.0)) throw ParameterError("radii must be positive");
      log_radii.push_back(std::log(r));
    }
  } else {
    for (const auto& s : subject.chain.stats) {
      if (s.cardinality > 1 && s.log_delta > -kInfinity) log_radii.push_back(s.log_delta);
    }
  }
  const auto bounds = gap_bounds_log(subject.space, log_radii, config.gap_mode);
  const auto sandwich = sandwich_at_chain(subject.space, subject.chain, config.gap_mode);
  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["gap_bounds"] = to_json(bounds);
  out.report["profile_estimate"] = profile(subject.chain).estimate;
  out.report["sandwich"] = Json{{"holds", sandwich.holds}, {"failures", sandwich.failures}};
  if (!sandwich.holds) out.failures.push_back("per-level gap sandwich fails");
  return out;
}

Outcome run_oracle(const RunConfig& config) {
  const auto subject = load_subject(config);
  const auto brute = brute_force_min_R(subject.space, config.radius, config.threads);
  const auto chain = dendrogram_chain(subject.space);
  double threshold_min = kInfinity;
  for (const auto& s : chain.stats) {
    if (s.delta < config.radius) threshold_min = std::min(threshold_min, s.log_ratio);
  }
  Outcome out;
  out.report["subject"] = subject_json(subject);
  out.report["radius"] = config.radius;
  out.report["brute_force"] = to_json(brute);
  out.report["threshold_chain_min_R"] = threshold_min;
  out.report["agree"] = brute.min_R == threshold_min;
  if (brute.min_R != threshold_min) {
    out.failures.push_back("brute-force minimum differs from the threshold-chain minimum");
  }
  return out;
}

Outcome dispatch(const RunConfig& config) {
  validate_config(config);
  Outcome out;
  switch (config.command) {
    case Command::kProfile:
      out = run_profile(config);
      break;
    case Command::kUltrametrize:
      out = run_ultrametrize(config);
      break;
    case Command::kEmbed:
      out = run_embed(config);
      break;
    case Command::kDimension:
      out = run_dimension(config);
      break;
    case Command::kZoo:
      out = run_zoo(config);
      break;
    case Command::kProduct:
      out = run_product(config);
      break;
    case Command::kHyperspace:
      out = run_hyperspace(config);
      break;
    case Command::kGapBounds:
      out = run_gap_bounds(config);
      break;
    case Command::kOracle:
      out = run_oracle(config);
      break;
  }
  Json report;
  report["schema"] = kSchemaVersion;
  report["command"] = to_string(config.command);
  report["config"] = config_to_json(config);
  report["status"] = out.failures.empty() ? "ok" : "verification_failed";
  report["failures"] = out.failures;
  for (auto& [key, value] : out.report.items()) report[key] = std::move(value);
  out.report = std::move(report);
  return out;
}

}  // namespace

const char* to_string(Command command) {
  for (const auto& c : kCommands) {
    if (c.command == command) return c.name;
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& c : kCommands) {
    if (name == c.name) return c.command;
  }
  return std::nullopt;
}

void validate_config(const RunConfig& config) {
  if (!(config.p > 1.0)) throw ParameterError("p must exceed 1");
  if (config.epsilon && !(*config.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (config.N && *config.N < 1) throw ParameterError("N must be at least 1");
  if (!(config.snowflake > 0.0 && config.snowflake <= 1.0)) {
    throw ParameterError("snowflake exponent must lie in (0, 1]");
  }
  if (config.depth < 1) throw ParameterError("depth must be at least 1");
  if (config.threads < 1) throw ParameterError("threads must be at least 1");
  if (!(config.grid_base > 1.0)) throw ParameterError("grid base must exceed 1");
  if (!(config.window_r > 0.0) || !(config.window_t >= 1.0)) {
    throw ParameterError("window needs r > 0 and t >= 1");
  }
  if (!(config.radius > 0.0)) throw ParameterError("radius must be positive");
}

Json config_to_json(const RunConfig& c) {
  return Json{{"command", to_string(c.command)},
              {"inputs", c.inputs},
              {"zoo", c.zoo},
              {"depth", c.depth},
              {"s", optional_number(c.s)},
              {"r1", optional_number(c.r1)},
              {"chain", to_string(c.chain)},
              {"p", c.p},
              {"epsilon", optional_number(c.epsilon)},
              {"N", c.N ? Json(*c.N) : Json(nullptr)},
              {"D", optional_number(c.D)},
              {"s_margin", optional_number(c.s_margin)},
              {"snowflake", c.snowflake},
              {"rescale", c.rescale},
              {"window_r", c.window_r},
              {"window_t", c.window_t},
              {"grid_base", c.grid_base},
              {"grid_levels", c.grid_levels},
              {"max_centres", c.max_centres},
              {"max_subset", c.max_subset},
              {"radii", c.radii},
              {"gap_mode", to_string(c.gap_mode)},
              {"radius", c.radius},
              {"threads", c.threads},
              {"deterministic", true}};
}

Json execute(const RunConfig& config) { return dispatch(config).report; }

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto outcome = dispatch(config);
    if (config.out_dir.empty()) {
      write_json(out, outcome.report);
    } else {
      namespace fs = std::filesystem;
      const fs::path dir(config.out_dir);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw DomainError("cannot create " + config.out_dir + ": " + ec.message());
      const auto write_file = [&](const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw DomainError("cannot write " + (dir / name).string());
        f << content;
      };
      std::ostringstream os;
      write_json(os, outcome.report);
      write_file(std::string(to_string(config.command)) + ".json", os.str());
      for (const auto& file : outcome.files) write_file(file.name, file.content);
    }
    for (const auto& f : outcome.failures) err << "verification failed: " << f << '\n';
    return outcome.failures.empty() ? 0 : 2;
  } catch (const VerificationError& e) {
    err << "verification failed: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace metriclab
