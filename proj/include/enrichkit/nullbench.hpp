#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enrichkit/dataio.hpp"
#include "enrichkit/gsea.hpp"
#include "enrichkit/sea.hpp"

namespace enrichkit {

enum class Method { Sea, Gsea };
std::string_view method_name(Method m);

/// Mean pairwise Pearson correlation across all samples for the set's rows.
/// Pairs involving a constant row contribute 0; their count is reported via
/// n_constant_rows when non-null.
double intraset_correlation(const ExpressionDataset& ds,
                            std::span<const std::int32_t> set_rows,
                            std::size_t* n_constant_rows = nullptr);

/// Predicted inflation of a mean-type set score under within-set
/// correlation rho: 1 + n_k * rho.
double variance_inflation(std::size_t n_k, double rho);

struct CorrelationSummary {
  std::vector<std::string> set_names;
  std::vector<double> rho;    // per-set mean pairwise correlation
  std::vector<double> gamma;  // per-set 1 + n_k * rho
  std::array<double, 20> rho_histogram{};    // fractions over [-1, 1]
  std::array<double, 20> gamma_histogram{};  // fractions over [gamma_min, gamma_max]
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  std::size_t n_constant_rows = 0;
};

CorrelationSummary correlation_summary(const ExpressionDataset& ds,
                                       const GeneSetCollection& sets);

struct ZscoreNullConfig {
  Metric metric = Metric::TwoSampleT;
  bool normalize = true;
  int n_perm = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Set-level z-scores under the two randomization nulls. Sample permutation
/// reshuffles phenotype labels and recomputes local statistics; gene
/// permutation reshuffles the gene-to-row mapping (set membership redrawn)
/// with labels fixed. Values pool across sets and permutations.
struct ZscoreNullResult {
  std::vector<double> sample_perm_z;
  std::vector<double> gene_perm_z;
  double sample_perm_mean = 0.0;
  double sample_perm_variance = 0.0;
  double gene_perm_mean = 0.0;
  double gene_perm_variance = 0.0;
};

ZscoreNullResult zscore_null_distributions(const ExpressionDataset& ds,
                                           const PhenotypeAssignment& ph,
                                           const GeneSetCollection& sets,
                                           const ZscoreNullConfig& cfg);

struct StudyConfig {
  Method method = Method::Sea;
  int n_runs = 1000;
  bool shuffle_genes = false;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string dataset_label = "dataset";
  // method settings applied inside each run
  Metric sea_metric = Metric::TwoSampleT;
  bool sea_normalize = true;
  Metric gsea_metric = Metric::SignalToNoise;
  bool gsea_normalize = false;
  double gsea_alpha = 1.0;
  int gsea_n_perm = 1000;
};

struct PerSetStudyRow {
  std::string set_name;
  std::size_t n_k = 0;
  double rho = 0.0;
  double gamma = 0.0;
  double mean_p = 0.0;
  double mean_q = 0.0;
  double frac_p_below_05 = 0.0;
  double frac_q_below_05 = 0.0;
};

struct NullStudyReport {
  Method method = Method::Sea;
  bool shuffle_genes = false;
  int n_runs = 0;
  std::string dataset_label;
  double z_variance_sample_perm = 0.0;
  double z_variance_gene_perm = 0.0;
  std::array<double, 20> p_histogram{};  // fractions, bins over [0, 1]
  std::array<double, 20> q_histogram{};
  double frac_q_below_05 = 0.0;
  double frac_q_below_25 = 0.0;
  std::vector<PerSetStudyRow> per_set;
};

/// Run the chosen method end to end (q-values included) on n_runs
/// class-size-preserving label randomizations, optionally shuffling gene
/// identifiers first in each run. Pools the per-set p and q values.
NullStudyReport randomized_phenotype_study(const ExpressionDataset& ds,
                                           const PhenotypeAssignment& ph,
                                           const GeneSetCollection& sets,
                                           const StudyConfig& cfg);

/// Side-by-side fractions per dataset in the two-threshold layout. Reports
/// for the same dataset label pair up; a missing method leaves its columns
/// blank. Rows where the first method exceeds ten times the second at the
/// 0.05 threshold are flagged.
std::string benchmark_summary_tsv(std::span<const NullStudyReport> reports);

std::string study_report_tsv(const NullStudyReport& report);
std::string study_report_json(const NullStudyReport& report);
std::string zscore_null_json(const ZscoreNullResult& z);

}  // namespace enrichkit
