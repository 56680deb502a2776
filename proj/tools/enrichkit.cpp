#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enrichkit/dataio.hpp"
#include "enrichkit/gsea.hpp"
#include "enrichkit/manifest.hpp"
#include "enrichkit/nullbench.hpp"
#include "enrichkit/sea.hpp"
#include "enrichkit/synth.hpp"
#include "enrichkit/text.hpp"

namespace fs = std::filesystem;
using namespace enrichkit;

namespace {

constexpr double kGuardOps = 1e10;

struct CommonOpts {
  std::string expr, cls, gmt, out;
  std::uint64_t seed = 0;
  int threads = 0;
  std::size_t min_size = 15;
  std::size_t max_size = 500;
  std::string metric;  // empty: per-command default
  std::string normalize = "default";
  bool full_precision = false;
  bool confirm_long = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_inputs = true) {
  if (needs_inputs) {
    cmd->add_option("--expr", o.expr, "expression matrix (GCT 1.2)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--cls", o.cls, "phenotype labels (CLS)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--gmt", o.gmt, "gene sets (GMT)")
        ->required()
        ->check(CLI::ExistingFile);
  }
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads,
                  "worker threads (0: ENRICHKIT_THREADS or all cores)");
  if (needs_inputs) {
    cmd->add_option("--min-size", o.min_size, "smallest retained set size");
    cmd->add_option("--max-size", o.max_size, "largest retained set size");
    cmd->add_option("--metric", o.metric, "local statistic: s2n or ttest");
    cmd->add_option("--normalize-scores", o.normalize,
                    "median/MAD score normalization: on or off");
    cmd->add_flag("--full-precision", o.full_precision,
                  "also write a .full.tsv with exact values");
    cmd->add_flag("--confirm-long", o.confirm_long, "allow long runs");
  }
}

struct Inputs {
  ExpressionDataset ds;
  PhenotypeAssignment ph;
  GeneSetCollection sets;
};

Inputs load_inputs(const CommonOpts& o) {
  Inputs in;
  in.ds = read_gct(o.expr);
  in.ph = read_cls(o.cls);
  if (in.ph.n_samples() != in.ds.n_samples())
    throw std::runtime_error("label count (" + std::to_string(in.ph.n_samples()) +
                             ") does not match sample count (" +
                             std::to_string(in.ds.n_samples()) + ")");
  const auto all_sets = read_gmt(o.gmt);
  FilterReport report;
  in.sets = restrict_and_filter(all_sets, in.ds, o.min_size, o.max_size, &report);
  if (!report.dropped.empty())
    std::fprintf(stderr, "note: %zu of %zu sets dropped by size bounds [%zu, %zu]\n",
                 report.dropped.size(), all_sets.size(), o.min_size, o.max_size);
  if (in.sets.size() == 0)
    throw std::runtime_error("no gene sets retained after restriction and size filtering");
  return in;
}

bool validate_common(const CommonOpts& o) {
  if (o.min_size < 2) {
    std::fprintf(stderr, "error: min-size must be >= 2\n");
    return false;
  }
  if (o.max_size < o.min_size) {
    std::fprintf(stderr, "error: max-size must be >= min-size\n");
    return false;
  }
  if (!o.metric.empty() && o.metric != "s2n" && o.metric != "ttest") {
    std::fprintf(stderr, "error: metric must be s2n or ttest\n");
    return false;
  }
  if (o.normalize != "default" && o.normalize != "on" && o.normalize != "off") {
    std::fprintf(stderr, "error: normalize-scores must be on or off\n");
    return false;
  }
  if (o.threads < 0) {
    std::fprintf(stderr, "error: threads must be >= 0\n");
    return false;
  }
  return true;
}

double estimate_run_ops(const Inputs& in, double perms) {
  const double n = static_cast<double>(in.ds.n_genes());
  const double m = static_cast<double>(in.ds.n_samples());
  double set_work = 0.0;
  for (const auto& s : in.sets.sets)
    set_work += static_cast<double>(s.members.size());
  const double per_pass = n * m + n * std::log2(std::max(n, 2.0)) + set_work;
  return per_pass * perms;
}

bool guard_long_run(const CommonOpts& o, double est_ops) {
  if (est_ops <= kGuardOps || o.confirm_long)
    return true;
  std::fprintf(stderr,
               "error: estimated work is about %.2g operations (over the 1e10 "
               "desk-scale guard); rerun with --confirm-long to proceed\n",
               est_ops);
  return false;
}

RunManifest start_manifest(const std::string& command, const CommonOpts& o) {
  RunManifest m;
  m.command = command;
  m.seed = o.seed;
  if (!o.expr.empty()) {
    m.input_digests[o.expr] = file_digest(o.expr);
    m.input_digests[o.cls] = file_digest(o.cls);
    m.input_digests[o.gmt] = file_digest(o.gmt);
    m.flags["expr"] = o.expr;
    m.flags["cls"] = o.cls;
    m.flags["gmt"] = o.gmt;
    m.flags["min_size"] = std::to_string(o.min_size);
    m.flags["max_size"] = std::to_string(o.max_size);
  }
  m.flags["out"] = o.out;
  m.flags["seed"] = std::to_string(o.seed);
  m.flags["threads"] = std::to_string(resolve_threads(o.threads));
  return m;
}

void finish_manifest(RunManifest& m, const std::string& out_dir,
                     std::chrono::steady_clock::time_point t0) {
  const auto dt = std::chrono::steady_clock::now() - t0;
  m.duration_seconds = std::chrono::duration<double>(dt).count();
  write_file(out_dir + "/manifest.json", m.to_json());
}

std::string sanitize(std::string_view name) {
  std::string s;
  for (const char c : name)
    s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return s;
}

int cmd_gsea(const CommonOpts& o, int nperm, double alpha,
             const std::vector<std::string>& export_sets) {
  const auto t0 = std::chrono::steady_clock::now();
  const Inputs in = load_inputs(o);
  if (!guard_long_run(o, estimate_run_ops(in, nperm)))
    return 2;

  GseaConfig cfg;
  cfg.metric = o.metric.empty() ? Metric::SignalToNoise : metric_from_name(o.metric);
  cfg.normalize = o.normalize == "default" ? false : o.normalize == "on";
  cfg.alpha = alpha;
  cfg.n_perm = nperm;
  cfg.seed = o.seed;
  cfg.threads = o.threads;

  const auto run = run_gsea(in.ds, in.ph, in.sets, cfg);

  fs::create_directories(o.out);
  write_file(o.out + "/gsea_results.tsv", gsea_results_tsv(run.results));
  if (o.full_precision)
    write_file(o.out + "/gsea_results.full.tsv", gsea_results_tsv(run.results, true));
  for (const auto& name : export_sets)
    write_file(o.out + "/running_sum_" + sanitize(name) + ".tsv",
               export_running_sum(run, name, cfg.alpha));

  RunManifest m = start_manifest("gsea", o);
  m.flags["metric"] = std::string(metric_name(cfg.metric));
  m.flags["normalize_scores"] = cfg.normalize ? "on" : "off";
  m.flags["nperm"] = std::to_string(cfg.n_perm);
  m.flags["alpha"] = format_sig(cfg.alpha);
  m.notes.push_back("q-values come from the shared estimator applied to nominal "
                    "p-values, not from the score-based permutation FDR");
  finish_manifest(m, o.out, t0);
  return 0;
}

int cmd_sea(const CommonOpts& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const Inputs in = load_inputs(o);
  if (!guard_long_run(o, estimate_run_ops(in, 1)))
    return 2;

  SeaConfig cfg;
  cfg.metric = o.metric.empty() ? Metric::TwoSampleT : metric_from_name(o.metric);
  cfg.normalize = o.normalize == "default" ? true : o.normalize == "on";
  cfg.threads = o.threads;

  const auto results = run_sea(in.ds, in.ph, in.sets, cfg);

  fs::create_directories(o.out);
  write_file(o.out + "/sea_results.tsv", sea_results_tsv(results));
  if (o.full_precision)
    write_file(o.out + "/sea_results.full.tsv", sea_results_tsv(results, true));

  RunManifest m = start_manifest("sea", o);
  m.flags["metric"] = std::string(metric_name(cfg.metric));
  m.flags["normalize_scores"] = cfg.normalize ? "on" : "off";
  m.notes.push_back("p is min(p_z, p_chi2) with no correction for taking the "
                    "better of two tests, which is mildly anti-conservative");
  m.notes.push_back("p_chi2 is the one-sided upper tail; under-dispersion is "
                    "not flagged");
  m.notes.push_back("q is the chosen statistic's q-value, estimated within "
                    "its own p-value family");
  finish_manifest(m, o.out, t0);
  return 0;
}

int cmd_diagnose(const CommonOpts& o, const std::string& method, int runs, int nperm,
                 bool shuffle_genes) {
  const auto t0 = std::chrono::steady_clock::now();
  const Inputs in = load_inputs(o);

  const bool want_sea = method == "sea" || method == "both";
  const bool want_gsea = method == "gsea" || method == "both";
  double est = 0.0;
  if (want_sea)
    est += estimate_run_ops(in, runs);
  if (want_gsea)
    est += estimate_run_ops(in, static_cast<double>(runs) * nperm);
  if (!guard_long_run(o, est))
    return 2;

  StudyConfig cfg;
  cfg.n_runs = runs;
  cfg.shuffle_genes = shuffle_genes;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.dataset_label = fs::path(o.expr).stem().string();
  cfg.gsea_n_perm = nperm;
  if (!o.metric.empty()) {
    cfg.sea_metric = metric_from_name(o.metric);
    cfg.gsea_metric = metric_from_name(o.metric);
  }
  if (o.normalize != "default") {
    cfg.sea_normalize = o.normalize == "on";
    cfg.gsea_normalize = o.normalize == "on";
  }

  fs::create_directories(o.out);
  std::vector<NullStudyReport> reports;
  if (want_sea) {
    cfg.method = Method::Sea;
    reports.push_back(randomized_phenotype_study(in.ds, in.ph, in.sets, cfg));
    write_file(o.out + "/diagnose_sea.tsv", study_report_tsv(reports.back()));
    write_file(o.out + "/diagnose_sea.json", study_report_json(reports.back()));
  }
  if (want_gsea) {
    cfg.method = Method::Gsea;
    reports.push_back(randomized_phenotype_study(in.ds, in.ph, in.sets, cfg));
    write_file(o.out + "/diagnose_gsea.tsv", study_report_tsv(reports.back()));
    write_file(o.out + "/diagnose_gsea.json", study_report_json(reports.back()));
  }
  if (reports.size() > 1)
    write_file(o.out + "/comparison.tsv", benchmark_summary_tsv(reports));

  RunManifest m = start_manifest("diagnose", o);
  m.flags["method"] = method;
  m.flags["runs"] = std::to_string(runs);
  m.flags["nperm"] = std::to_string(nperm);
  m.flags["shuffle_genes"] = shuffle_genes ? "true" : "false";
  finish_manifest(m, o.out, t0);
  return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& spec_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthSpec spec = read_synth_spec(spec_path);

  const auto data = generate(spec);
  fs::create_directories(o.out);
  write_file(o.out + "/data.gct", write_gct(data.dataset));
  write_file(o.out + "/labels.cls", write_cls(data.phenotype));
  write_file(o.out + "/sets.gmt", write_gmt(data.sets));

  RunManifest m = start_manifest("simulate", o);
  m.seed = spec.seed;
  m.input_digests[spec_path] = file_digest(spec_path);
  m.flags["spec"] = spec_path;
  m.flags["genes"] = std::to_string(spec.n_genes);
  m.flags["samples"] = std::to_string(spec.n_samples);
  m.flags["blocks"] = std::to_string(spec.blocks.size());
  m.flags["decoys"] = std::to_string(spec.n_decoys);
  finish_manifest(m, o.out, t0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gene set enrichment toolkit: permutation-based and parametric "
               "set scoring with null-calibration diagnostics"};
  app.require_subcommand(1);

  CommonOpts gsea_opts, sea_opts, diag_opts, sim_opts;
  int gsea_nperm = 1000;
  double gsea_alpha = 1.0;
  std::vector<std::string> export_sets;
  std::string diag_method = "both";
  int diag_runs = 1000;
  int diag_nperm = 1000;
  bool diag_shuffle = false;
  std::string sim_spec;

  auto* gsea_cmd =
      app.add_subcommand("gsea", "rank-based enrichment with a sample-permutation null");
  add_common(gsea_cmd, gsea_opts);
  gsea_cmd->add_option("--nperm", gsea_nperm, "label permutations for the null");
  gsea_cmd->add_option("--alpha", gsea_alpha, "score weight exponent");
  gsea_cmd->add_option("--export-running-sum", export_sets,
                       "set name whose running sum is exported (repeatable)");

  auto* sea_cmd =
      app.add_subcommand("sea", "parametric set scoring under a normal-theory null");
  add_common(sea_cmd, sea_opts);

  auto* diag_cmd = app.add_subcommand("diagnose", "phenotype-randomization null study");
  add_common(diag_cmd, diag_opts);
  diag_cmd->add_option("--method", diag_method, "sea, gsea or both");
  diag_cmd->add_option("--runs", diag_runs, "phenotype randomizations");
  diag_cmd->add_option("--nperm", diag_nperm, "permutations inside each gsea run");
  diag_cmd->add_flag("--shuffle-genes", diag_shuffle,
                     "also shuffle gene identifiers in every run");

  auto* sim_cmd = app.add_subcommand("simulate", "write synthetic GCT/CLS/GMT files");
  sim_cmd->add_option("--spec", sim_spec, "key=value spec file")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(sim_cmd, sim_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gsea_cmd->parsed()) {
      if (!validate_common(gsea_opts))
        return 2;
      if (gsea_nperm < 1) {
        std::fprintf(stderr, "error: nperm must be >= 1\n");
        return 2;
      }
      if (gsea_alpha < 0.0) {
        std::fprintf(stderr, "error: alpha must be >= 0\n");
        return 2;
      }
      return cmd_gsea(gsea_opts, gsea_nperm, gsea_alpha, export_sets);
    }
    if (sea_cmd->parsed()) {
      if (!validate_common(sea_opts))
        return 2;
      return cmd_sea(sea_opts);
    }
    if (diag_cmd->parsed()) {
      if (!validate_common(diag_opts))
        return 2;
      if (diag_method != "sea" && diag_method != "gsea" && diag_method != "both") {
        std::fprintf(stderr, "error: method must be sea, gsea or both\n");
        return 2;
      }
      if (diag_runs < 1) {
        std::fprintf(stderr, "error: runs must be >= 1\n");
        return 2;
      }
      if (diag_nperm < 1) {
        std::fprintf(stderr, "error: nperm must be >= 1\n");
        return 2;
      }
      return cmd_diagnose(diag_opts, diag_method, diag_runs, diag_nperm, diag_shuffle);
    }
    if (sim_cmd->parsed())
      return cmd_simulate(sim_opts, sim_spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
