#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enrichkit/dataio.hpp"
#include "enrichkit/local_stats.hpp"

namespace enrichkit {

struct GseaConfig {
  Metric metric = Metric::SignalToNoise;
  bool normalize = false;
  double alpha = 1.0;
  int n_perm = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Genes sorted by local statistic, descending; ties keep row order.
struct RankedList {
  std::vector<std::int32_t> order;         // rank position -> dataset row
  std::vector<double> sorted_scores;       // non-increasing
  std::vector<std::int32_t> rank_of_row;   // dataset row -> rank position
};

RankedList rank_genes(const LocalStatistics& stats);
void rank_genes_into(std::span<const double> scores, RankedList& out);

struct EsCurve {
  double es = 0.0;
  std::vector<double> running_sum;  // one value per rank position
  std::int32_t peak_index = 0;      // 0-based rank position, first maximal |sum|
};

/// Running difference between the weight-cumulative in-set distribution and
/// the count-cumulative out-of-set distribution; the score is the maximum
/// deviation from zero, signed. In-set weights are |score|^alpha and must
/// not all vanish. Requires 1 <= n_k < n_genes.
EsCurve enrichment_score(const RankedList& ranked,
                         std::span<const std::int32_t> set_rows, double alpha);

/// Same statistic without materializing the curve: walks only the in-set
/// rank positions, O(n_k) after the position sort. `positions` must be
/// strictly increasing rank positions.
struct EsValue {
  double es = 0.0;
  std::int32_t peak_index = 0;
};
EsValue enrichment_score_at_positions(std::span<const double> sorted_scores,
                                      std::span<const std::int32_t> positions,
                                      double alpha);

/// Null score vectors, one per set, indexed by permutation number.
struct PermutationNull {
  std::vector<std::vector<double>> per_set;
  std::uint64_t seed = 0;
  int n_perm = 0;
};

/// Class-size-preserving label shuffles; permutation j draws from a stream
/// keyed by (seed, j), so results are identical at any thread count.
PermutationNull build_null(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                           std::span<const std::vector<std::int32_t>> set_rows,
                           const GseaConfig& cfg);

/// Reference single-threaded implementation, kept for equivalence tests and
/// the benchmark; must match build_null bitwise.
PermutationNull build_null_serial(const ExpressionDataset& ds,
                                  const PhenotypeAssignment& ph,
                                  std::span<const std::vector<std::int32_t>> set_rows,
                                  const GseaConfig& cfg);

struct NormalizedScore {
  double nes = 0.0;
  double p_nominal = 1.0;
  bool degenerate = false;  // no null values on the observed score's side
};

/// Rescale by the mean same-sign null score (magnitude-preserving, so nes
/// keeps the sign of es) and count at-least-as-extreme same-sign null values
/// with add-one smoothing.
NormalizedScore normalize_and_test(double es, std::span<const double> null_es);

struct GseaResult {
  std::string set_name;
  std::size_t n_k = 0;
  double es = 0.0;
  double nes = 0.0;
  double p_nominal = 1.0;
  double q_value = 1.0;
  double null_pos_mean = 0.0;
  double null_neg_mean = 0.0;
  std::int32_t peak_index = 0;
  bool degenerate_null = false;
};

/// Results plus the context needed to export running-sum curves.
struct GseaRun {
  std::vector<GseaResult> results;  // sorted by p_nominal, then |nes| desc
  LocalStatistics stats;
  RankedList ranked;
  std::vector<std::string> set_names;                // collection order
  std::vector<std::vector<std::int32_t>> set_rows;   // collection order
};

GseaRun run_gsea(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                 const GeneSetCollection& sets, const GseaConfig& cfg);

/// Per-rank table for one set: rank, running sum, in-set flag, peak flag.
std::string export_running_sum(const GseaRun& run, std::string_view set_name,
                               double alpha);

std::string gsea_results_tsv(std::span<const GseaResult> results,
                             bool full_precision = false);

}  // namespace enrichkit
