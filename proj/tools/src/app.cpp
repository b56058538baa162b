#include "homsum/cli/app.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "homsum/bounds.hpp"
#include "homsum/cli/report_json.hpp"
#include "homsum/diagnose.hpp"
#include "homsum/error.hpp"
#include "homsum/kernel_io.hpp"
#include "homsum/simulate.hpp"

#ifndef HOMSUM_VERSION
#define HOMSUM_VERSION "0.0.0"
#endif

namespace homsum::cli {

namespace {

constexpr const char* kReportFormat = "homsum-report/1";

struct Options {
  // kernel source
  std::vector<std::string> kernels;
  std::string family;
  int d = 2;
  std::uint64_t m = 0;
  std::uint64_t big_n = 0;
  double density = 0.5;
  std::optional<double> variance;
  bool normalize = false;
  // laws and sampling
  std::string law = "gaussian";
  std::optional<int> nu;
  std::uint64_t n = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  // bound inputs
  std::string budget;
  std::string profile;
  std::string covariance;
  double cap = 1e7;
  // output
  std::string out;
  std::string dump;
  std::string spec;
  std::string report;
  bool timestamp = false;
};

// Arguments that never change the report: dropped from the manifest so a
// re-run with another worker count or destination is byte-identical.
std::vector<std::string> manifest_argv(const std::vector<std::string>& args) {
  static const std::vector<std::string> with_value{"--workers", "--out", "--dump-samples"};
  std::vector<std::string> kept;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto& a = args[k];
    if (a == "--timestamp") continue;
    bool skip = false;
    for (const auto& name : with_value) {
      if (a == name) {
        ++k;
        skip = true;
      } else if (a.rfind(name + "=", 0) == 0) {
        skip = true;
      }
    }
    if (!skip) kept.push_back(a);
  }
  return kept;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Usage, std::string(flag) + " expects comma-separated numbers, got '" + text + "'");
    }
  }
  return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) out.push_back(parse_list(row, "--covariance"));
  return out;
}

MomentProfile resolve_profile(const Options& o, const DistributionSpec& law) {
  if (o.profile.empty()) {
    return {std::max(1.0, law.abs_third_moment()), std::max(1.0, law.fourth_moment())};
  }
  const auto v = parse_list(o.profile, "--profile");
  if (v.size() != 2) throw Error(ErrorCode::Usage, "--profile expects beta3,beta4");
  return {v[0], v[1]};
}

TestFunctionBudget resolve_budget(const Options& o) {
  if (o.budget.empty()) return {1.0, 1.0, 1.0};
  const auto v = parse_list(o.budget, "--budget");
  if (v.size() != 3) throw Error(ErrorCode::Usage, "--budget expects a,b,B3");
  return {v[0], v[1], v[2]};
}

MultiTestFunctionBudget resolve_multi_budget(const Options& o) {
  if (o.budget.empty()) return {1.0, 1.0};
  const auto v = parse_list(o.budget, "--budget");
  if (v.size() != 2) throw Error(ErrorCode::Usage, "--budget expects B2,B3 for multivariate bounds");
  return {v[0], v[1]};
}

std::vector<SymmetricKernel> resolve_kernels(const Options& o, double target_variance, Json& params) {
  std::vector<SymmetricKernel> out;
  if (!o.kernels.empty() && !o.family.empty()) throw Error(ErrorCode::Usage, "give --kernel or --family, not both");
  if (!o.family.empty()) {
    const auto family = parse_kernel_family(o.family);
    if (!family) throw Error(ErrorCode::Usage, "unknown family '" + o.family + "'");
    KernelFamilySpec spec;
    spec.family = *family;
    spec.order = o.d;
    spec.size = *family == KernelFamily::DisjointPairs ? o.m : o.big_n;
    spec.target_variance = o.variance.value_or(target_variance);
    spec.seed = o.seed;
    spec.density = o.density;
    params["family"] = {{"name", o.family}, {"d", spec.order}, {"size", spec.size},
                        {"variance", spec.target_variance}, {"density", spec.density}};
    out.push_back(generate_family(spec));
    return out;
  }
  if (o.kernels.empty()) throw Error(ErrorCode::Usage, "no kernel given (--kernel PATH or --family NAME)");
  params["kernels"] = o.kernels;
  for (const auto& path : o.kernels) {
    auto f = load_kernel(path);
    if (o.normalize) f = normalize_to_variance(f, o.variance.value_or(target_variance));
    out.push_back(std::move(f));
  }
  params["normalize"] = o.normalize;
  return out;
}

SampleConfig sample_config(const Options& o) {
  SampleConfig c;
  c.n = o.n;
  c.seed = o.seed;
  c.workers = o.workers;
  return c;
}

Json manifest(const std::string& command, const std::vector<std::string>& args, const Json& params, const Options& o) {
  Json m;
  m["command"] = command;
  m["argv"] = manifest_argv(args);
  m["params"] = params;
  m["seed"] = o.seed;
  m["version"] = {{"homsum", HOMSUM_VERSION}, {"report_format", kReportFormat}};
  if (o.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    m["timestamp"] = buf;
  }
  return m;
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw Error(ErrorCode::MalformedInput, "cannot write " + o.out);
  file << text;
  if (!file) throw Error(ErrorCode::MalformedInput, "write failed for " + o.out);
}

void emit_report(const Json& manifest_json, const Json& report, const Options& o, std::ostream& out) {
  Json doc;
  doc["manifest"] = manifest_json;
  doc["report"] = report;
  emit(doc.dump(2) + "\n", o, out);
}

// E[Q^k] under `law`, sampling only when no exact route exists.
MomentEstimate moment_for_bound(const SymmetricKernel& f, const DistributionSpec& law, int k, const Options& o,
                                std::optional<SampleSummary>& samples) {
  const bool exact = law.law() == Law::Gaussian || law.law() == Law::Rademacher;
  if (exact) {
    try {
      return estimate_moment(f, law, k, nullptr);
    } catch (const Error& e) {
      // no exact route for this kernel: fall through to sampling
      if (e.code() != ErrorCode::ParameterOutOfRange) throw;
    }
  }
  if (!samples) samples = sample_sums(f, law, sample_config(o));
  return estimate_moment(f, law, k, &*samples);
}

Json bound_params(const Options& o, const DistributionSpec& law, const MomentProfile& profile) {
  Json p;
  p["law"] = law.name();
  p["profile"] = {{"beta3", profile.beta3}, {"beta4", profile.beta4}};
  if (!o.budget.empty()) p["budget"] = o.budget;
  p["n"] = o.n;
  p["materialization_cap"] = o.cap;
  return p;
}

int cmd_bound(const std::string& kind, const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto law = DistributionSpec::parse(o.law);
  const auto profile = resolve_profile(o, law);
  Json params = bound_params(o, law, profile);
  ContractionOptions copts;
  copts.materialization_cap = static_cast<std::uint64_t>(o.cap);
  BoundReport rep;
  std::optional<SampleSummary> samples;
  if (kind == "chi2") {
    const int nu = o.nu.value_or(1);
    if (nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
    params["nu"] = nu;
    const auto ks = resolve_kernels(o, 2.0 * nu, params);
    if (ks.size() != 1) throw Error(ErrorCode::Usage, "bound chi2 takes one kernel");
    if (ks[0].order() % 2 != 0) throw Error(ErrorCode::OddOrder, "chi-square bounds need an even order");
    const auto eq3 = moment_for_bound(ks[0], law, 3, o, samples);
    const auto eq4 = moment_for_bound(ks[0], law, 4, o, samples);
    rep = chi_square_smooth_bound(ks[0], profile, resolve_budget(o), nu, eq3, eq4, copts);
  } else if (kind == "normal" || kind == "wasserstein") {
    const auto ks = resolve_kernels(o, 1.0, params);
    if (ks.size() != 1) throw Error(ErrorCode::Usage, "bound " + kind + " takes one kernel");
    const auto eq4 = moment_for_bound(ks[0], law, 4, o, samples);
    rep = kind == "normal" ? normal_smooth_bound(ks[0], profile, resolve_budget(o), eq4, copts)
                           : wasserstein_bound(ks[0], profile, eq4);
  } else {
    const auto ks = resolve_kernels(o, 1.0, params);
    if (kind == "multi") {
      rep = multivariate_smooth_bound(ks, profile, resolve_multi_budget(o));
    } else {
      std::optional<std::vector<std::vector<double>>> v;
      if (!o.covariance.empty()) {
        v = parse_matrix(o.covariance);
        params["covariance"] = *v;
      }
      rep = convex_sets_bound(ks, profile, v);
    }
  }
  if (samples) params["seed"] = o.seed;
  emit_report(manifest("bound " + kind, args, params, o), to_json(rep), o, out);
  return kExitOk;
}

int cmd_simulate(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto law = DistributionSpec::parse(o.law);
  Json params;
  params["law"] = law.name();
  params["n"] = o.n;
  if (o.nu && *o.nu < 1) throw Error(ErrorCode::InvalidDegrees, "degrees of freedom must be >= 1");
  const double variance = o.nu ? 2.0 * *o.nu : 1.0;
  const auto ks = resolve_kernels(o, variance, params);
  if (o.nu) params["nu"] = *o.nu;
  Json report;
  if (ks.size() == 1) {
    const auto s = sample_sums(ks[0], law, sample_config(o));
    report = simulation_json(ks[0], law, s, o.nu);
    if (!o.dump.empty()) write_sample_dump(o.dump, s.samples);
  } else {
    const auto s = sample_vector_sums(ks, law, sample_config(o));
    report = vector_simulation_json(ks, law, s);
    if (!o.dump.empty()) write_sample_dump(o.dump, s.joint);
  }
  emit_report(manifest("simulate", args, params, o), report, o, out);
  return kExitOk;
}

// Diagnose spec files are JSON objects; unknown keys are rejected.
Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, path + ": " + e.what());
  }
}

template <class T>
T field(const Json& spec, const char* key, T fallback) {
  if (!spec.contains(key)) return fallback;
  try {
    return spec.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedInput, std::string("spec field '") + key + "' has the wrong type");
  }
}

int cmd_diagnose(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const Json spec = read_json_file(o.spec);
  if (!spec.is_object()) throw Error(ErrorCode::MalformedInput, "spec must be a JSON object");
  static const std::vector<std::string> known{"diagnostic", "family", "d", "density", "family_seed", "sweep",
                                              "target", "nu", "laws", "law", "n", "seed", "tolerance",
                                              "threshold", "kernel", "size", "copies", "disjoint", "covariance",
                                              "materialization_cap"};
  for (const auto& [key, value] : spec.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::MalformedInput, "unknown spec field '" + key + "'");
    }
  }
  const auto kind = field<std::string>(spec, "diagnostic", "");
  SampleConfig sample;
  sample.n = field<std::uint64_t>(spec, "n", 0);
  sample.seed = field<std::uint64_t>(spec, "seed", 0);
  sample.workers = o.workers;

  KernelFamilySpec family;
  const auto family_name = field<std::string>(spec, "family", "");
  if (!family_name.empty()) {
    const auto f = parse_kernel_family(family_name);
    if (!f) throw Error(ErrorCode::MalformedInput, "unknown family '" + family_name + "'");
    family.family = *f;
  }
  family.order = field<int>(spec, "d", 2);
  family.density = field<double>(spec, "density", 0.5);
  family.seed = field<std::uint64_t>(spec, "family_seed", 0);

  SequenceSpec seq;
  seq.family = family;
  seq.sweep = field<std::vector<std::uint64_t>>(spec, "sweep", {});
  const auto target = field<std::string>(spec, "target", "normal");
  if (target != "normal" && target != "chi2") throw Error(ErrorCode::MalformedInput, "target must be normal or chi2");
  seq.target = target == "normal" ? TargetLaw::Normal : TargetLaw::ChiSquare;
  seq.nu = field<int>(spec, "nu", 1);
  for (const auto& name : field<std::vector<std::string>>(spec, "laws", {})) {
    seq.laws.push_back(DistributionSpec::parse(name));
  }
  seq.sample = sample;
  seq.tolerance = field<double>(spec, "tolerance", 1e-9);
  seq.terminal_threshold = field<double>(spec, "threshold", 0.05);
  seq.contraction.materialization_cap = field<std::uint64_t>(spec, "materialization_cap", 10'000'000);

  VerdictReport rep;
  if (kind == "fourth_moment") {
    rep = fourth_moment_diagnostic(seq);
  } else if (kind == "chi_square") {
    rep = chi_square_diagnostic(seq, seq.nu);
  } else if (kind == "universality") {
    rep = universality_experiment(seq);
  } else if (kind == "de_jong") {
    SymmetricKernel f(2, 2);
    if (spec.contains("kernel")) {
      f = load_kernel(field<std::string>(spec, "kernel", ""));
    } else {
      family.size = field<std::uint64_t>(spec, "size", 0);
      f = generate_family(family);
    }
    DeJongOptions opts;
    opts.threshold = seq.terminal_threshold;
    rep = de_jong_report(f, DistributionSpec::parse(field<std::string>(spec, "law", "gaussian")), sample, opts);
  } else if (kind == "multivariate") {
    MultivariateSpec mv;
    mv.sweep = seq.sweep;
    const auto copies = field<int>(spec, "copies", 2);
    const bool disjoint = field<bool>(spec, "disjoint", true);
    if (copies < 1) throw Error(ErrorCode::MalformedInput, "copies must be >= 1");
    for (std::uint64_t size : seq.sweep) {
      family.size = size;
      const auto f = generate_family(family);
      std::vector<SymmetricKernel> point;
      const auto n = f.dimension();
      const auto total = disjoint ? static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(copies) : n;
      if (total > std::numeric_limits<Index>::max()) throw Error(ErrorCode::MalformedInput, "dimension too large");
      for (int c = 0; c < copies; ++c) {
        point.push_back(f.shifted(disjoint ? static_cast<Index>(c) * n : 0, static_cast<Index>(total)));
      }
      mv.kernels.push_back(std::move(point));
    }
    mv.covariance = field<std::vector<std::vector<double>>>(spec, "covariance", {});
    mv.laws = seq.laws;
    mv.sample = sample;
    mv.tolerance = seq.tolerance;
    mv.terminal_threshold = seq.terminal_threshold;
    rep = multivariate_diagnostic(mv);
  } else {
    throw Error(ErrorCode::MalformedInput, "unknown diagnostic '" + kind + "'");
  }
  Options effective = o;
  effective.seed = sample.seed;
  emit_report(manifest("diagnose", args, {{"spec", spec}}, effective), to_json(rep), o, out);
  return kExitOk;
}

int cmd_kernel(const std::string& action, const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  if (action == "generate") {
    if (o.family.empty()) throw Error(ErrorCode::Usage, "kernel generate needs --family");
    Json params;
    const auto ks = resolve_kernels(o, 1.0, params);
    emit(write_kernel_text(ks[0]), o, out);
    return kExitOk;
  }
  if (o.kernels.size() != 1) throw Error(ErrorCode::Usage, "kernel " + action + " takes exactly one --kernel");
  const auto f = load_kernel(o.kernels[0]);
  if (action == "normalize") {
    emit(write_kernel_text(normalize_to_variance(f, o.variance.value_or(1.0))), o, out);
    return kExitOk;
  }
  Json params;
  params["kernel"] = o.kernels[0];
  emit_report(manifest("kernel inspect", args, params, o), kernel_summary(f), o, out);
  return kExitOk;
}

void add_kernel_source(CLI::App* app, Options& o) {
  app->add_option("--kernel", o.kernels, "Kernel file (repeatable)");
  app->add_option("--family", o.family, "Kernel family: single_pair, constant, disjoint_pairs, walsh, random_sparse");
  app->add_option("--d", o.d, "Order of a generated kernel")->check(CLI::Range(1, 12));
  app->add_option("-m,--m", o.m, "Number of pairs (disjoint_pairs)");
  app->add_option("-N,--N", o.big_n, "Dimension (constant, walsh, random_sparse)");
  app->add_option("--density", o.density, "Fraction of tuples kept by random_sparse");
  app->add_option("--variance", o.variance, "Target variance d!||f||^2");
  app->add_flag("--normalize", o.normalize, "Rescale kernel files to the target variance");
}

void add_sampling(CLI::App* app, Options& o) {
  app->add_option("--law", o.law, "Input law");
  app->add_option("--n", o.n, "Monte Carlo sample count");
  app->add_option("--seed", o.seed, "Seed");
  app->add_option("--workers", o.workers, "Worker threads (0 = available parallelism)");
}

void add_output(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "Output path (default: stdout)");
  app->add_flag("--timestamp", o.timestamp, "Record the wall-clock time in the manifest");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_rerun(const Options& o, std::ostream& out, std::ostream& err) {
  const Json doc = read_json_file(o.report);
  std::vector<std::string> argv;
  try {
    argv = doc.at("manifest").at("argv").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedInput, o.report + " has no manifest argv");
  }
  if (!argv.empty() && argv.front() == "rerun") throw Error(ErrorCode::MalformedInput, "manifest is a rerun");
  argv.push_back("--workers");
  argv.push_back(std::to_string(o.workers));
  if (!o.out.empty()) {
    argv.push_back("--out");
    argv.push_back(o.out);
  }
  return dispatch(argv, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homogeneous sums: contraction norms, distance bounds, simulation and diagnostics", "homsum"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HOMSUM_VERSION);
  Options o;

  auto* kernel = app.add_subcommand("kernel", "Generate, inspect or normalize kernel files");
  kernel->require_subcommand(1);
  for (const char* action : {"generate", "inspect", "normalize"}) {
    auto* sub = kernel->add_subcommand(action);
    add_kernel_source(sub, o);
    sub->add_option("--seed", o.seed, "Seed for random_sparse");
    add_output(sub, o);
  }

  auto* bound = app.add_subcommand("bound", "Evaluate a distance bound");
  bound->require_subcommand(1);
  for (const char* kind : {"normal", "chi2", "wasserstein", "multi", "convex"}) {
    auto* sub = bound->add_subcommand(kind);
    add_kernel_source(sub, o);
    add_sampling(sub, o);
    add_output(sub, o);
    sub->add_option("--nu", o.nu, "Degrees of freedom (chi2, default 1)");
    sub->add_option("--budget", o.budget, "Test-function budget a,b,B3 (multi: B2,B3)");
    sub->add_option("--profile", o.profile, "Moment profile beta3,beta4 (default: from --law)");
    sub->add_option("--covariance", o.covariance, "Target covariance rows, e.g. 1,0;0,1 (convex)");
    sub->add_option("--cap", o.cap, "Materialization cap for symmetrized contractions");
  }

  auto* simulate = app.add_subcommand("simulate", "Sample homogeneous sums");
  add_kernel_source(simulate, o);
  add_sampling(simulate, o);
  add_output(simulate, o);
  simulate->add_option("--nu", o.nu, "Compare with the centered chi-square law");
  simulate->add_option("--dump-samples", o.dump, "Write raw samples to this path");

  auto* diagnose = app.add_subcommand("diagnose", "Run a diagnostic sweep from a spec file");
  diagnose->add_option("--spec", o.spec, "Spec file")->required();
  diagnose->add_option("--workers", o.workers, "Worker threads (0 = available parallelism)");
  add_output(diagnose, o);

  auto* rerun = app.add_subcommand("rerun", "Re-run the manifest embedded in a report");
  rerun->add_option("--report", o.report, "Report file")->required();
  rerun->add_option("--workers", o.workers, "Worker threads (0 = available parallelism)");
  rerun->add_option("--out", o.out, "Output path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << HOMSUM_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "homsum: " << e.what() << "\n";
    return kExitUsage;
  }

  for (auto* sub : kernel->get_subcommands()) return cmd_kernel(sub->get_name(), o, args, out);
  for (auto* sub : bound->get_subcommands()) return cmd_bound(sub->get_name(), o, args, out);
  if (simulate->parsed()) return cmd_simulate(o, args, out);
  if (diagnose->parsed()) return cmd_diagnose(o, args, out);
  if (rerun->parsed()) return cmd_rerun(o, out, err);
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "homsum: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const nlohmann::json::exception& e) {
    err << "homsum: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::bad_alloc&) {
    err << "homsum: out of memory\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    err << "homsum: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace homsum::cli
