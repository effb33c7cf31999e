#include "genscore/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <utility>

#include <openssl/evp.h>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "genscore/balance.hpp"
#include "genscore/cli/csv.hpp"
#include "genscore/error.hpp"
#include "genscore/estimate.hpp"
#include "genscore/select.hpp"
#include "genscore/sim.hpp"
#include "json.hpp"

#ifndef GENSCORE_VERSION
#define GENSCORE_VERSION "0.0.0"
#endif

namespace genscore::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Results are staged in memory and written only once every step succeeded.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content) {
    files.emplace_back(std::move(name), std::move(content));
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write output file", path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kInvalidInput, "failed writing output file", path.string());
}

void commit(const fs::path& dir, const Outputs& outputs) {
  fs::create_directories(dir);
  for (const auto& [name, content] : outputs.files) write_file(dir / name, content);
}

// SOURCE_DATE_EPOCH pins the manifest timestamps so whole output trees can be
// compared byte for byte.
std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      t = static_cast<std::time_t>(std::stoll(epoch));
    } catch (const std::exception&) {
    }
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

struct Common {
  std::string input;
  std::string out_dir = ".";
  std::string outcome = "auto";
  bool nested = false;
  bool heteroscedastic = false;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  bool no_refit = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("input", c.input, "Pooled source/target CSV")->required();
  cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--outcome", c.outcome, "Outcome kind: auto, continuous or binary")
      ->capture_default_str();
  cmd->add_flag("--nested", c.nested, "Use the nested-design score");
  cmd->add_flag("--heteroscedastic", c.heteroscedastic,
                "Estimate arm variances by k-NN smoothing of squared residuals");
  cmd->add_option("--seed", c.seed, "Bootstrap seed")->capture_default_str();
  cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_flag("--no-refit", c.no_refit,
                "Evaluate full-sample models on the subset instead of re-fitting");
}

ordered_json common_json(const Common& c) {
  return ordered_json{{"outcome", c.outcome},
                      {"nested", c.nested},
                      {"heteroscedastic", c.heteroscedastic},
                      {"seed", c.seed},
                      {"refit", !c.no_refit}};
}

std::vector<Method> parse_methods(const std::string& text) {
  if (text == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(parse_method(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

struct Scored {
  Dataset data;
  NuisanceFit pooled;
  ScoreTable table;
  std::string input_sha1;
};

Scored load_and_score(const Common& c) {
  const std::string text = read_file(c.input);
  Scored out{parse_dataset_csv(text, parse_outcome_mode(c.outcome)), {}, {}, git_blob_sha1(text)};
  out.pooled = fit_nuisance(out.data, c.heteroscedastic);
  ScoreInputs inputs = ScoreInputs::homoscedastic(out.pooled.rho, out.pooled.pi, out.data.s);
  if (c.heteroscedastic) {
    const Dataset& d = out.data;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d.s[i] != 1) continue;
      const double fitted = d.a[i] == 1 ? out.pooled.mu->mu1[i] : out.pooled.mu->mu0[i];
      sq[i] = (d.y[i] - fitted) * (d.y[i] - fitted);
    }
    inputs.var1 = knn_residual_variance(d.x.values(), d.s, d.a, sq, 1);
    inputs.var0 = knn_residual_variance(d.x.values(), d.s, d.a, sq, 0);
  }
  out.table = c.nested ? kappa_nested(std::move(inputs)) : kappa(std::move(inputs));
  return out;
}

Selection select_subset(const ScoreTable& table, const std::string& rule) {
  if (rule == "auto") return optimal_cutoff(table);
  if (rule.rfind("pct:", 0) == 0) {
    double q = 0.0;
    try {
      std::size_t used = 0;
      q = std::stod(rule.substr(4), &used);
      if (used != rule.size() - 4) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidInput, "bad percentile cutoff '" + rule + "'", "--cutoff");
    }
    double gamma = target_percentile(table, q);
    if (gamma <= 0.0) gamma = std::numeric_limits<double>::denorm_min();
    return cutoff_at(table, gamma);
  }
  double gamma = 0.0;
  try {
    std::size_t used = 0;
    gamma = std::stod(rule, &used);
    if (used != rule.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput,
                "cutoff must be 'auto', 'pct:<q>' or a positive number", "--cutoff");
  }
  return cutoff_at(table, gamma);
}

ordered_json report_json(const EstimateReport& r, bool with_se) {
  ordered_json j{{"estimator", to_string(r.estimator)},
                 {"estimand", to_string(r.estimand)},
                 {"point", number_or_null(r.point)}};
  if (with_se) {
    j["se"] = number_or_null(r.se);
    j["ci_low"] = number_or_null(r.ci_low);
    j["ci_high"] = number_or_null(r.ci_high);
  } else {
    j["se"] = nullptr;
    j["ci_low"] = nullptr;
    j["ci_high"] = nullptr;
  }
  j["n_target_used"] = r.n_target_used;
  j["n_source_used"] = r.n_source_used;
  j["warnings"] = r.warnings;
  return j;
}

ordered_json census_json(const BootstrapResult& b) {
  ordered_json census = ordered_json::object();
  for (const auto& [reason, n] : b.failure_census) census[reason] = n;
  return ordered_json{{"successes", b.successes}, {"failures", b.failures}, {"census", census}};
}

std::string balance_csv(const std::vector<BalanceRow>& rows) {
  std::string out = "variable,subset,f_unweighted,p_unweighted,f_weighted,p_weighted\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.variable, r.subset ? 1 : 0,
                       r.f_unweighted, r.p_unweighted, r.f_weighted, r.p_weighted);
  }
  return out;
}

ordered_json manifest(const std::string& command, const std::vector<std::string>& args,
                      ordered_json config, std::uint64_t seed, ordered_json input,
                      const Outputs& outputs, const std::string& started) {
  std::vector<std::string> names;
  for (const auto& f : outputs.files) names.push_back(f.first);
  names.push_back("manifest.json");
  return ordered_json{{"tool", "genscore"},
                      {"tool_version", GENSCORE_VERSION},
                      {"command", command},
                      {"arguments", args},
                      {"config", std::move(config)},
                      {"seed", seed},
                      {"input", std::move(input)},
                      {"outputs", names},
                      {"started_at", started},
                      {"finished_at", utc_now()}};
}

struct AnalyzeOptions {
  Common common;
  std::string method = "all";
  std::string cutoff = "auto";
  int bootstrap = 200;
};

void cmd_analyze(const AnalyzeOptions& o, const std::vector<std::string>& args,
                 std::ostream& out) {
  const std::string started = utc_now();
  const Common& c = o.common;
  if (o.bootstrap == 1 || o.bootstrap < 0) {
    throw Error(ErrorCode::kInvalidInput, "--bootstrap must be 0 or at least 2", "--bootstrap");
  }
  const std::vector<Method> methods = parse_methods(o.method);
  Scored sc = load_and_score(c);
  const Dataset& data = sc.data;
  const Selection sel = select_subset(sc.table, o.cutoff);
  const double full_bound = variance_bound(sc.table, full_mask(data.size()));

  Outputs files;
  {
    std::string csv = "unit,S,rho,pi,kappa,kappa_display,selected\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      csv += fmt::format("{},{},{},{},{},{},{}\n", i, data.s[i], sc.table.inputs.rho[i],
                         sc.table.inputs.pi[i], sc.table.kappa[i],
                         kappa_display(sc.table.kappa[i]),
                         sel.mask[static_cast<std::size_t>(i)] ? 1 : 0);
    }
    files.add("scores.csv", std::move(csv));
  }
  {
    ordered_json j{{"cutoff_rule", o.cutoff},
                   {"score", c.nested ? "kappa_nested" : "kappa"},
                   {"variance", c.heteroscedastic ? "knn_residual" : "homoscedastic"},
                   {"gamma", sel.gamma},
                   {"target_coverage", sel.target_coverage},
                   {"source_coverage", sel.source_coverage},
                   {"n_target_selected", sel.n_target_selected},
                   {"n_source_selected", sel.n_source_selected},
                   {"n_target", data.n_target()},
                   {"n_source", data.n_source()},
                   {"v_bound", sel.v_bound},
                   {"v_bound_sqrt", std::sqrt(sel.v_bound)},
                   {"full_target_v_bound", full_bound},
                   {"full_target_v_bound_sqrt", std::sqrt(full_bound)}};
    files.add("selection.json", j.dump(2) + "\n");
  }

  const bool refit = !c.no_refit;
  const Mask all = full_mask(data.size());
  std::vector<EstimateReport> full = estimate_all(data, all, methods, refit);
  std::vector<EstimateReport> subset = estimate_all(data, sel.mask, methods, refit);
  for (auto& r : subset) r.estimand = Estimand::kSubset;
  ordered_json boot_json = nullptr;
  if (o.bootstrap >= 2) {
    BootstrapOptions bo;
    bo.reps = o.bootstrap;
    bo.seed = c.seed;
    bo.workers = c.workers;
    bo.refit = refit;
    bo.purpose = StreamPurpose::kBootstrapFull;
    const BootstrapResult bf = bootstrap_se(data, all, methods, bo);
    bo.purpose = StreamPurpose::kBootstrapSubset;
    const BootstrapResult bs = bootstrap_se(data, sel.mask, methods, bo);
    attach_bootstrap(full, bf);
    attach_bootstrap(subset, bs);
    boot_json = ordered_json{{"reps", o.bootstrap},
                             {"seed", c.seed},
                             {"stratified_by", "S,A"},
                             {"full_target", census_json(bf)},
                             {"subset", census_json(bs)}};
  }
  {
    ordered_json list = ordered_json::array();
    for (const auto* group : {&full, &subset}) {
      for (const auto& r : *group) list.push_back(report_json(r, o.bootstrap >= 2));
    }
    ordered_json j{{"outcome_kind", data.outcome_kind == OutcomeKind::kBinary ? "binary"
                                                                              : "continuous"},
                   {"refit", refit},
                   {"confidence_level", 0.95},
                   {"bootstrap", boot_json},
                   {"estimates", list}};
    files.add("estimates.json", j.dump(2) + "\n");
  }
  {
    std::vector<BalanceRow> rows = balance_table(data, sc.pooled.rho, sc.pooled.pi, all);
    const Dataset sub = data.select_rows(mask_indices(sel.mask));
    const NuisanceFit sub_fit = fit_nuisance(sub, false);
    for (auto& r : balance_table(sub, sub_fit.rho, sub_fit.pi, full_mask(sub.size()))) {
      r.subset = true;
      rows.push_back(std::move(r));
    }
    files.add("balance.csv", balance_csv(rows));
  }

  ordered_json config = common_json(c);
  config["method"] = o.method;
  config["cutoff"] = o.cutoff;
  config["bootstrap"] = o.bootstrap;
  files.add("manifest.json",
            manifest("analyze", args, config, c.seed,
                     ordered_json{{"path", c.input}, {"sha1", sc.input_sha1}}, files, started)
                    .dump(2) +
                "\n");
  commit(c.out_dir, files);
  out << fmt::format("gamma={:.6g} target_coverage={:.4f} v_bound_sqrt={:.6g}\n", sel.gamma,
                     sel.target_coverage, std::sqrt(sel.v_bound));
}

struct SweepOptions {
  Common common;
  std::vector<double> percentiles = default_percentiles();
  int bootstrap = 0;
  std::string method = "all";
};

void cmd_sweep(const SweepOptions& o, const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  const std::string started = utc_now();
  const Common& c = o.common;
  if (o.bootstrap == 1 || o.bootstrap < 0) {
    throw Error(ErrorCode::kInvalidInput, "--bootstrap must be 0 or at least 2", "--bootstrap");
  }
  const std::vector<Method> methods = parse_methods(o.method);
  const Scored sc = load_and_score(c);
  const std::vector<SweepRow> rows = sweep(sc.table, o.percentiles);

  std::string csv = "percentile,gamma,coverage,v_bound_sqrt";
  if (o.bootstrap >= 2) {
    for (const Method m : methods) csv += fmt::format(",se_{}", to_string(m));
  }
  csv += '\n';
  ordered_json warnings = ordered_json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const SweepRow& row = rows[r];
    csv += fmt::format("{},{},{},{}", row.percentile, row.gamma, row.target_coverage,
                       row.v_bound_sqrt);
    if (o.bootstrap >= 2) {
      const Selection sel = cutoff_at(sc.table, row.gamma);
      BootstrapOptions bo;
      bo.reps = o.bootstrap;
      bo.seed = c.seed;
      bo.workers = c.workers;
      bo.refit = !c.no_refit;
      bo.stream = r;
      try {
        const BootstrapResult b = bootstrap_se(sc.data, sel.mask, methods, bo);
        for (const double se : b.se) csv += fmt::format(",{}", se);
      } catch (const Error& e) {
        // A tiny subset can leave an arm empty; keep the row, blank its SEs.
        for (std::size_t m = 0; m < methods.size(); ++m) csv += ",";
        const std::string msg =
            fmt::format("percentile {}: bootstrap failed: {} ({})", row.percentile, e.what(),
                        e.location());
        err << msg << '\n';
        warnings.push_back(msg);
      }
    }
    csv += '\n';
  }
  Outputs files;
  files.add("sweep.csv", std::move(csv));
  ordered_json config = common_json(c);
  config["percentiles"] = o.percentiles;
  config["bootstrap"] = o.bootstrap;
  config["method"] = o.method;
  ordered_json m = manifest("sweep", args, config, c.seed,
                            ordered_json{{"path", c.input}, {"sha1", sc.input_sha1}}, files,
                            started);
  m["warnings"] = warnings;
  files.add("manifest.json", m.dump(2) + "\n");
  commit(c.out_dir, files);
  out << fmt::format("{} sweep rows written\n", rows.size());
}

struct SimulateOptions {
  std::string scenario = "all";
  int reps = 500;
  int bootstrap_reps = 200;
  std::uint64_t seed = 1;
  int n_source = 600;
  int n_target = 800;
  unsigned workers = 0;
  std::string method = "all";
  std::string out_dir = ".";
};

std::vector<Scenario> parse_scenarios(const std::string& text) {
  if (text == "all") return all_scenarios();
  std::vector<Scenario> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(Scenario::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

std::string table1_csv(const std::vector<SimResultRow>& rows) {
  std::string out =
      "scenario,estimator,estimand,bias_x10,rmse_x10,ci_width,ci_coverage_pct,"
      "subset_proportion_pct,bias_x10_mcse,rmse_x10_mcse,ci_coverage_pct_mcse,replicates\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{:.2f},{:.2f},{:.4f},{:.4f},{:.2f},{}\n",
                       r.scenario, to_string(r.estimator),
                       r.estimand == Estimand::kFullTarget ? "full" : "subset", r.bias_x10,
                       r.rmse_x10, r.ci_width, r.ci_coverage_pct, r.mean_subset_proportion,
                       r.bias_x10_mcse, r.rmse_x10_mcse, r.ci_coverage_pct_mcse, r.replicates);
  }
  return out;
}

void cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& args,
                  std::ostream& out) {
  const std::string started = utc_now();
  const std::vector<Scenario> scenarios = parse_scenarios(o.scenario);
  std::vector<SimResultRow> rows;
  ordered_json failures = ordered_json::object();
  for (const Scenario& s : scenarios) {
    SimConfig cfg;
    cfg.scenario = s;
    cfg.reps = o.reps;
    cfg.bootstrap_reps = o.bootstrap_reps;
    cfg.seed = o.seed;
    cfg.n_source = o.n_source;
    cfg.n_target = o.n_target;
    cfg.workers = o.workers;
    cfg.estimators = parse_methods(o.method);
    const StudyResult study = run_study(cfg);
    rows.insert(rows.end(), study.rows.begin(), study.rows.end());
    ordered_json census = ordered_json::object();
    for (const auto& [reason, n] : study.failure_census) census[reason] = n;
    failures[s.name()] = ordered_json{{"failed", study.failures}, {"census", census}};
    out << fmt::format("{}: {} replicates, mean subset proportion {:.1f}%\n", s.name(),
                       o.reps - study.failures,
                       study.rows.empty() ? 0.0 : study.rows.front().mean_subset_proportion);
  }
  Outputs files;
  files.add("table1.csv", table1_csv(rows));
  ordered_json config{{"scenario", o.scenario},     {"reps", o.reps},
                      {"bootstrap_reps", o.bootstrap_reps}, {"seed", o.seed},
                      {"n_source", o.n_source},     {"n_target", o.n_target},
                      {"method", o.method}};
  ordered_json m = manifest("simulate", args, config, o.seed,
                            ordered_json{{"sha1", git_blob_sha1(config.dump())}}, files, started);
  m["replicate_failures"] = failures;
  files.add("manifest.json", m.dump(2) + "\n");
  commit(o.out_dir, files);
}

struct GenerateOptions {
  std::string kind = "sim";
  std::string scenario = "O1P2";
  std::uint64_t seed = 1;
  int n_source = 600;
  int n_target = 800;
  int n_pooled = 1500;
  std::string output = "-";
};

void cmd_generate(const GenerateOptions& o, std::ostream& out) {
  Dataset data;
  if (o.kind == "sim") {
    SimConfig cfg;
    cfg.scenario = Scenario::parse(o.scenario);
    cfg.n_source = o.n_source;
    cfg.n_target = o.n_target;
    data = draw_sample(cfg, o.seed).data;
  } else if (o.kind == "binary") {
    data = draw_binary_outcome_analog(o.seed, o.n_pooled).data;
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown dataset kind '" + o.kind + "'", "--kind");
  }
  const std::string csv = format_dataset_csv(data);
  if (o.output == "-") {
    out << csv;
  } else {
    const fs::path path(o.output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, csv);
  }
}

void report_error(int code, std::string_view kind, const std::string& message,
                  const std::string& location, const std::string& out_dir, std::ostream& err) {
  const ordered_json j{{"code", code}, {"kind", kind}, {"message", message}, {"location", location}};
  err << j.dump() << '\n';
  if (out_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) return;
  std::ofstream f(fs::path(out_dir) / "error.json", std::ios::trunc);
  if (f) f << j.dump(2) << '\n';
}

}  // namespace

std::string git_blob_sha1(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalizability scores, target subpopulation selection and "
               "generalized treatment-effect estimation",
               "genscore"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GENSCORE_VERSION);

  AnalyzeOptions analyze;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Score units, select a subset and estimate effects");
  add_common(analyze_cmd, analyze.common);
  analyze_cmd->add_option("--method", analyze.method, "ipw, or, aipw, a comma list, or all")
      ->capture_default_str();
  analyze_cmd->add_option("--cutoff", analyze.cutoff, "auto, pct:<q>, or a score value")
      ->capture_default_str();
  analyze_cmd->add_option("--bootstrap", analyze.bootstrap, "Bootstrap replicates (0 = none)")
      ->capture_default_str();

  SweepOptions sweep_opts;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Variance bound over percentile cutoffs of the score");
  add_common(sweep_cmd, sweep_opts.common);
  sweep_cmd->add_option("--percentiles", sweep_opts.percentiles, "Comma-separated percentiles")
      ->delimiter(',');
  sweep_cmd->add_option("--bootstrap", sweep_opts.bootstrap,
                        "Bootstrap replicates per cutoff for SE columns (0 = none)")
      ->capture_default_str();
  sweep_cmd->add_option("--method", sweep_opts.method, "Estimators for SE columns")
      ->capture_default_str();

  SimulateOptions sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo study");
  sim_cmd->add_option("--scenario", sim.scenario, "O1P1 ... O2P4, a comma list, or all")
      ->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "Monte Carlo replicates")->capture_default_str();
  sim_cmd->add_option("--bootstrap-reps", sim.bootstrap_reps, "Bootstrap replicates")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--n-source", sim.n_source)->capture_default_str();
  sim_cmd->add_option("--n-target", sim.n_target)->capture_default_str();
  sim_cmd->add_option("--workers", sim.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  sim_cmd->add_option("--method", sim.method)->capture_default_str();
  sim_cmd->add_option("--out", sim.out_dir, "Output directory")->capture_default_str();

  GenerateOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen_cmd->add_option("--kind", gen.kind, "sim or binary")->capture_default_str();
  gen_cmd->add_option("--scenario", gen.scenario)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--n-source", gen.n_source)->capture_default_str();
  gen_cmd->add_option("--n-target", gen.n_target)->capture_default_str();
  gen_cmd->add_option("--n", gen.n_pooled, "Pooled size for --kind binary")
      ->capture_default_str();
  gen_cmd->add_option("--output", gen.output, "Output path, - for stdout")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorCode::kInvalidInput);
  }

  std::string out_dir;
  try {
    if (analyze_cmd->parsed()) {
      out_dir = analyze.common.out_dir;
      cmd_analyze(analyze, args, out);
    } else if (sweep_cmd->parsed()) {
      out_dir = sweep_opts.common.out_dir;
      cmd_sweep(sweep_opts, args, out, err);
    } else if (sim_cmd->parsed()) {
      out_dir = sim.out_dir;
      cmd_simulate(sim, args, out);
    } else if (gen_cmd->parsed()) {
      cmd_generate(gen, out);
    }
  } catch (const Error& e) {
    report_error(static_cast<int>(e.code()), to_string(e.code()), e.what(), e.location(), out_dir,
                 err);
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    report_error(1, "internal_error", e.what(), "", out_dir, err);
    return 1;
  }
  return 0;
}

}  // namespace genscore::cli
