// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: agreement, stability, bias-strength, drift and
// scenario generation.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stabilimeter/io/csv.hpp"
#include "stabilimeter/io/json.hpp"
#include "stabilimeter/stabilimeter.hpp"

namespace fs = std::filesystem;
using namespace stabilimeter;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kParse = 3,
  kParameter = 4,
  kCapacity = 5,
  kLearner = 6,
  kInput = 7,
};

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::string format = "json";
};

struct LearnerFlags {
  std::string learner = "tree";
  double min_gain_ratio = 0.0;
  std::size_t max_depth = 0;
  std::size_t k = 1;
  double epsilon = 0.01;
};

std::uint64_t resolve_seed(const Common& common) {
  if (common.seed) return *common.seed;
  const char* env = std::getenv("STABILIMETER_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const std::string text(env);
    if (text.front() == '-') throw std::invalid_argument(text);
    const auto value = std::stoull(text, &used, 10);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParameterError("STABILIMETER_SEED must be a non-negative integer, got '" +
                         std::string(env) + "'");
  }
}

ExecutionPolicy policy(const Common& common) { return ExecutionPolicy{common.threads}; }

void emit(const Common& common, const std::string& text) {
  if (common.out.empty() || common.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(common.out, std::ios::binary);
  if (!out) throw InputError("cannot write " + common.out);
  out << text;
}

std::string dump(const io::json& j) { return j.dump(2) + "\n"; }

LearnerPtr make_base_learner(const std::string& name, const LearnerFlags& flags) {
  if (name == "tree") {
    TreeParams params;
    params.min_gain_ratio = flags.min_gain_ratio;
    if (flags.max_depth > 0) params.max_depth = flags.max_depth;
    return std::make_shared<TreeLearner>(params);
  }
  if (name == "knn") return std::make_shared<KnnLearner>(flags.k);
  if (name == "majority") return std::make_shared<MajorityLearner>();
  if (name == "constant") return std::make_shared<ConstantLearner>();
  throw ParameterError("unknown learner '" + name + "'");
}

/// `chooser` needs the candidate concepts and is only offered by
/// bias-strength.
LearnerPtr make_learner(const LearnerFlags& flags, const std::vector<Concept>& candidates = {}) {
  const std::string& spec = flags.learner;
  if (spec == "chooser") {
    if (candidates.empty()) throw ParameterError("the chooser learner is only available for bias-strength");
    return std::make_shared<AccuracyChooser>(candidates);
  }
  const std::string prefix = "memorizing:";
  if (spec.rfind(prefix, 0) == 0)
    return std::make_shared<MemorizingLearner>(make_base_learner(spec.substr(prefix.size()), flags),
                                               flags.epsilon);
  return make_base_learner(spec, flags);
}

std::optional<io::SchemaFile> schema_flag(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::read_schema_file(path);
}

AttributeDistribution distribution(const std::string& kind, const AttributeSchema& schema,
                                   const std::optional<Dataset>& data) {
  if (kind == "uniform") return AttributeDistribution::uniform(schema);
  if (!data) throw ParameterError("--dist empirical needs --data");
  if (!(data->schema() == schema)) throw InputError("--data schema differs from the concepts'");
  return AttributeDistribution::empirical(*data);
}

/// Loads two concepts. Bare formulas adopt the domain of the data, of the
/// other concept, or the wider of the two formula widths.
std::pair<Concept, Concept> load_pair(const std::string& p1, const std::string& p2,
                                      const std::optional<Dataset>& data) {
  Concept f1 = io::read_concept_file(p1);
  Concept f2 = io::read_concept_file(p2);
  auto adopt = [](Concept& f, const DomainPtr& domain) {
    if (const auto* b = f.as<FormulaConcept>(); b && !same_domain(f.domain(), domain))
      f = formula_concept(b->formula(), domain);
  };
  if (data) {
    adopt(f1, data->domain());
    adopt(f2, data->domain());
  } else if (!same_domain(f1.domain(), f2.domain())) {
    const bool formula1 = f1.as<FormulaConcept>() != nullptr;
    const bool formula2 = f2.as<FormulaConcept>() != nullptr;
    if (formula1 && formula2) {
      const auto width = std::max(f1.domain()->schema.size(), f2.domain()->schema.size());
      adopt(f1, boolean_domain(width));
      adopt(f2, boolean_domain(width));
    } else if (formula1) {
      adopt(f1, f2.domain());
    } else if (formula2) {
      adopt(f2, f1.domain());
    }
  }
  if (!same_domain(f1.domain(), f2.domain()))
    throw InputError("the two concepts have different schemas or class sets");
  return {std::move(f1), std::move(f2)};
}

std::optional<Dataset> optional_data(const std::string& path, const std::string& schema) {
  if (path.empty()) return std::nullopt;
  return io::parse_dataset(path, schema_flag(schema));
}

void add_common(CLI::App* app, Common& common, bool with_format = true) {
  app->add_option("--seed", common.seed, "Master seed (default: $STABILIMETER_SEED, else 0)");
  app->add_option("--threads", common.threads,
                  "Worker threads; 0 uses every hardware thread, 1 runs sequentially")
      ->capture_default_str();
  app->add_option("--out", common.out, "Output file (default: standard output)");
  if (with_format)
    app->add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

void add_learner(CLI::App* app, LearnerFlags& flags, const std::string& extra_choices = "") {
  app->add_option("--learner", flags.learner,
                  "Learner: tree|knn|majority|constant|memorizing:<base>" + extra_choices)
      ->capture_default_str();
  app->add_option("--min-gain-ratio", flags.min_gain_ratio, "Tree pre-pruning threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--max-depth", flags.max_depth, "Tree depth limit; 0 means unlimited")
      ->capture_default_str();
  app->add_option("--k", flags.k, "Neighbours for knn")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--epsilon", flags.epsilon, "Accuracy margin of the memorizing wrapper")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

/// Fills options not given on the command line from a flat key=value file,
/// read with CLI11's INI reader. Keys are long flag names without dashes.
void apply_config(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw ParseError(path, 0, e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    CLI::Option* option = app->get_option_no_throw("--" + item.name);
    if (!option || item.name == "config" || item.name == "help")
      throw ParseError(path, 0, "unknown key '" + item.name + "'");
    if (option->count() > 0) continue;
    try {
      option->add_result(item.inputs);
      option->run_callback();
    } catch (const CLI::Error& e) {
      throw ParseError(path, 0, item.name + ": " + e.what());
    }
  }
}

// agreement ------------------------------------------------------------------

struct AgreementCommand {
  Common common;
  std::string f1, f2, data, schema, dist = "uniform";
  std::uint64_t n = 10'000;
  bool exact = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("agreement", "Estimate the agreement of two concepts");
    app->add_option("f1", f1, "First concept file (JSON document or formula)")->required();
    app->add_option("f2", f2, "Second concept file")->required();
    app->add_option("--n", n, "Monte Carlo sample size")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--dist", dist, "Attribute distribution")
        ->check(CLI::IsMember({"uniform", "empirical"}))
        ->capture_default_str();
    app->add_option("--data", data, "Dataset for the empirical distribution");
    app->add_option("--schema", schema, "Schema file for --data");
    app->add_flag("--exact", exact, "Also enumerate the attribute space for the exact value");
    add_common(app, common);
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto dataset = optional_data(data, schema);
    const auto [a, b] = load_pair(f1, f2, dataset);
    const auto dist_a = distribution(dist, a.domain()->schema, dataset);
    const auto estimate = estimate_agreement(a, b, dist_a, n, resolve_seed(common), policy(common));
    io::json j = io::to_json(estimate);
    std::optional<Fraction> exact_value;
    if (exact) {
      exact_value = exact_agreement(a, b, dist_a);
      j["exact"] = io::fraction_json(*exact_value);
      if (dist_a.strictly_positive()) j["materially_equivalent"] = exact_value->is_one();
    }
    if (common.format == "json") return emit(common, dump(j));
    std::ostringstream out;
    out << "value,agreeing,sample_count,worst_case_std" << (exact ? ",exact" : "") << '\n'
        << j["value"].dump() << ',' << estimate.agreeing << ',' << estimate.sample_count << ','
        << j["worst_case_std"].dump();
    if (exact_value) out << ',' << exact_value->numerator << '/' << exact_value->denominator;
    out << '\n';
    emit(common, out.str());
  }
};

// stability ------------------------------------------------------------------

struct StabilityCommand {
  Common common;
  LearnerFlags learner;
  std::string data, schema, dist = "uniform";
  std::uint64_t m = 20, n = 10'000;
  bool skip_failed = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("stability", "Estimate accuracy and stability on a dataset");
    app->add_option("--data", data, "Dataset CSV (header ending in 'class')")->required();
    app->add_option("--schema", schema, "Schema file (default: <data>.schema when present)");
    add_learner(app, learner);
    app->add_option("--m", m, "Random half splits")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--n", n, "Agreement samples per split")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--dist", dist, "Distribution D_A for agreement sampling")
        ->check(CLI::IsMember({"uniform", "empirical"}))
        ->capture_default_str();
    app->add_flag("--skip-failed", skip_failed,
                  "Drop iterations whose training fails instead of aborting");
    add_common(app, common);
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto dataset = optional_data(data, schema);
    const auto dist_a = distribution(dist, dataset->schema(), dataset);
    StabilityOptions options;
    options.m = m;
    options.n = n;
    options.skip_failed_iterations = skip_failed;
    options.execution = policy(common);
    const auto report = estimate_stability_accuracy(*make_learner(learner), *dataset, dist_a,
                                                    resolve_seed(common), options);
    if (common.format == "json") return emit(common, dump(io::to_json(report)));
    std::ostringstream out;
    io::write_csv(out, report);
    emit(common, out.str());
  }
};

// bias-strength ----------------------------------------------------------------

struct BiasCommand {
  Common common;
  LearnerFlags learner;
  std::string f1, f2, data, schema, dist = "uniform", orientation = "printed";
  double p_step = 0.05, alpha = 0.05;
  std::size_t trials = 30, train_size = 100;
  std::uint64_t n = 10'000;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("bias-strength",
                                    "Sweep the mixture weight p and measure preferential bias");
    app->add_option("f1", f1, "Concept f1 (JSON document or formula)")->required();
    app->add_option("f2", f2, "Concept f2")->required();
    add_learner(app, learner, "|chooser (picks f1 or f2 by training accuracy)");
    app->add_option("--p-step", p_step, "Grid spacing of p, in (0, 0.1]")->capture_default_str();
    app->add_option("--trials", trials, "Training sets per grid point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--train-size", train_size, "Examples per training set")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--n", n, "Agreement samples per trial")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--alpha", alpha, "Sign-test level for a decided preference")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--dist", dist, "Attribute distribution for mixtures and agreement")
        ->check(CLI::IsMember({"uniform", "empirical"}))
        ->capture_default_str();
    app->add_option("--data", data, "Dataset for the empirical distribution");
    app->add_option("--schema", schema, "Schema file for --data");
    app->add_option("--orientation", orientation,
                    "printed: labels from f2 with probability p; swapped: from f1 with probability p")
        ->check(CLI::IsMember({"printed", "swapped"}))
        ->capture_default_str();
    add_common(app, common);
    app->final_callback([this] { run(); });
  }

  void run() {
    const auto dataset = optional_data(data, schema);
    const auto [a, b] = load_pair(f1, f2, dataset);
    const auto dist_a = distribution(dist, a.domain()->schema, dataset);
    BiasSweepOptions options;
    options.grid_step = p_step;
    options.orientation =
        orientation == "printed" ? MixtureOrientation::printed : MixtureOrientation::swapped;
    options.preference.train_size = train_size;
    options.preference.trials = trials;
    options.preference.n_agree = n;
    options.preference.alpha = alpha;
    options.preference.execution = policy(common);
    const auto result = measure_bias_strength(*make_learner(learner, {a, b}), a, b, dist_a, dist_a,
                                              options, resolve_seed(common));
    if (common.format == "json") return emit(common, dump(io::to_json(result)));
    std::ostringstream out;
    io::write_csv(out, result);
    emit(common, out.str());
  }
};

// drift ------------------------------------------------------------------------

struct DriftCommand {
  Common common;
  LearnerFlags learner;
  std::string data, schema, dist = "uniform";
  std::uint64_t n = 10'000;
  double threshold = 0.5;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("drift", "Flag changes between consecutive data batches");
    app->add_option("--data", data, "Directory of CSV batches, taken in file-name order")
        ->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--schema", schema,
                    "Schema file (default: the first batch's sidecar when present)");
    add_learner(app, learner);
    app->add_option("--n", n, "Agreement samples per batch pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--threshold", threshold, "Alarm when agreement falls below this value")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--dist", dist, "uniform, or empirical over all batches pooled")
        ->check(CLI::IsMember({"uniform", "empirical"}))
        ->capture_default_str();
    add_common(app, common);
    app->final_callback([this] { run(); });
  }

  void run() {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(data))
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.size() < 2) throw InputError("drift needs at least two .csv batches in " + data);

    auto declared = schema_flag(schema);
    if (!declared && fs::exists(io::sidecar_path(files.front())))
      declared = io::read_schema_file(io::sidecar_path(files.front()));
    std::vector<io::RawTable> tables;
    for (const auto& f : files) tables.push_back(io::read_raw_file(f));
    const auto domain = io::resolve_domain(tables, declared);
    std::vector<Dataset> batches;
    for (const auto& t : tables) batches.push_back(io::to_dataset(t, domain));

    std::optional<Dataset> pooled;
    if (dist == "empirical") {
      std::vector<LabeledExample> all;
      for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
      pooled = Dataset(domain, std::move(all));
    }
    const auto dist_a = distribution(dist, domain->schema, pooled);
    const auto alarms = monitor_drift(*make_learner(learner), batches, dist_a, n, threshold,
                                      resolve_seed(common), policy(common));
    if (common.format == "json") {
      io::json j{{"batches", io::json::array()}, {"alarms", io::to_json(alarms)}};
      for (const auto& f : files) j["batches"].push_back(f.filename().string());
      std::size_t fired = 0;
      for (const auto& a : alarms) fired += a.fired ? 1 : 0;
      j["fired"] = fired;
      return emit(common, dump(j));
    }
    std::ostringstream out;
    io::write_csv(out, alarms);
    emit(common, out.str());
  }
};

// demo -------------------------------------------------------------------------

struct DemoCorrelatedCommand {
  Common common;
  CLI::App* app = nullptr;
  std::string config;
  std::size_t size = 100, attributes = 6;
  double noise = 0.02;

  void attach(CLI::App& demo) {
    app = demo.add_subcommand(
        "correlated", "Write a dataset whose first two columns are near copies (class = target)");
    app->add_option("--config", config, "Flat key=value file setting any of the flags below");
    app->add_option("--size", size, "Examples")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--attributes", attributes, "Boolean attributes (at least 2)")
        ->capture_default_str();
    app->add_option("--noise", noise, "Probability that the proxy column differs from the target")
        ->capture_default_str();
    app->add_option("--seed", common.seed, "Master seed (default: $STABILIMETER_SEED, else 0)");
    app->add_option("--out", common.out, "Output CSV; the schema goes to <out>.schema")->required();
    app->final_callback([this] { run(); });
  }

  void run() {
    apply_config(app, config);
    const auto data = sample_dataset(make_correlated_scenario(attributes, noise), size,
                                     resolve_seed(common));
    io::write_dataset_file(common.out, data);
  }
};

struct DemoDriftCommand {
  Common common;
  CLI::App* app = nullptr;
  std::string config;
  std::size_t attributes = 6, batches = 10, batch_size = 500, drift_at = 5;
  double noise = 0.0;
  std::string target = "(or (and (var 0) (var 1)) (var 2))";
  bool stationary = false;

  void attach(CLI::App& demo) {
    app = demo.add_subcommand(
        "drift", "Write CSV batches labeled by a target that is negated at --drift-at");
    app->add_option("--config", config, "Flat key=value file setting any of the flags below");
    app->add_option("--attributes", attributes, "Boolean attributes")->capture_default_str();
    app->add_option("--batches", batches, "Number of batches")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Examples per batch")->capture_default_str();
    app->add_option("--drift-at", drift_at, "First batch drawn after the drift")->capture_default_str();
    app->add_option("--noise", noise, "Label flip rate")->capture_default_str();
    app->add_option("--target", target, "Target formula before the drift")->capture_default_str();
    app->add_flag("--stationary", stationary, "Keep the target unchanged (no drift)");
    app->add_option("--seed", common.seed, "Master seed (default: $STABILIMETER_SEED, else 0)");
    app->add_option("--out", common.out, "Output directory for batch_NNN.csv files")->required();
    app->final_callback([this] { run(); });
  }

  void run() {
    apply_config(app, config);
    const auto domain = boolean_domain(attributes);
    const auto pre = formula_concept(BooleanFormula::parse(target), domain);
    const auto post = stationary ? pre : complement(pre);
    const auto uniform = AttributeDistribution::uniform(domain->schema);
    const DriftSequence sequence{ConceptWithNoise{pre, uniform, noise},
                                 ConceptWithNoise{post, uniform, noise}, drift_at, batches,
                                 batch_size};
    const auto generated = make_drift_sequence(sequence, resolve_seed(common));
    fs::create_directories(common.out);
    for (std::size_t k = 0; k < generated.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "batch_%03zu.csv", k);
      io::write_dataset_file(fs::path(common.out) / name, generated[k]);
    }
  }
};

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::parse: return kParse;
    case ErrorKind::parameter: return kParameter;
    case ErrorKind::capacity: return kCapacity;
    case ErrorKind::learner: return kLearner;
    case ErrorKind::input: return kInput;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabilimeter: stability and preferential bias of classification learners"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 unexpected failure, 2 usage, 3 parse error, 4 parameter error,\n"
      "5 capacity error, 6 learner failure, 7 input error.");

  AgreementCommand agreement;
  StabilityCommand stability;
  BiasCommand bias;
  DriftCommand drift;
  DemoCorrelatedCommand demo_correlated;
  DemoDriftCommand demo_drift;
  agreement.attach(app);
  stability.attach(app);
  bias.attach(app);
  drift.attach(app);
  auto* demo = app.add_subcommand("demo", "Generate scenario data");
  demo->require_subcommand(1);
  demo_correlated.attach(*demo);
  demo_drift.attach(*demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "stabilimeter: error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "stabilimeter: error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
