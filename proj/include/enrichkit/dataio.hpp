#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace enrichkit {

/// Expression matrix: n_genes rows by n_samples columns, row-major.
/// All values are finite; gene and sample identifiers are unique.
struct ExpressionDataset {
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;
  std::vector<double> values;

  std::size_t n_genes() const { return gene_ids.size(); }
  std::size_t n_samples() const { return sample_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * n_samples(), n_samples()};
  }
  double at(std::size_t i, std::size_t j) const {
    return values[i * n_samples() + j];
  }
};

/// Binary phenotype: one class index (0 or 1) per sample.
struct PhenotypeAssignment {
  std::vector<std::uint8_t> labels;
  std::array<std::string, 2> class_names;

  std::size_t n_samples() const { return labels.size(); }
  std::size_t class_count(int cls) const;
};

struct GeneSet {
  std::string name;
  std::vector<std::string> members;  // deduplicated, input order
};

struct GeneSetCollection {
  std::vector<GeneSet> sets;
  std::size_t size() const { return sets.size(); }
};

// Parsers take whole-file text; `source` labels error messages. All accept
// Unix or Windows line endings. Errors are std::runtime_error with
// "<source>:<line>: <what>" messages.
ExpressionDataset parse_gct(std::string_view text, std::string_view source = "gct");
PhenotypeAssignment parse_cls(std::string_view text, std::string_view source = "cls");
GeneSetCollection parse_gmt(std::string_view text, std::string_view source = "gmt");

ExpressionDataset read_gct(const std::string& path);
PhenotypeAssignment read_cls(const std::string& path);
GeneSetCollection read_gmt(const std::string& path);

// Writers round-trip through the parsers; expression values use the
// shortest representation that parses back bit-equal.
std::string write_gct(const ExpressionDataset& ds);
std::string write_cls(const PhenotypeAssignment& ph);
std::string write_gmt(const GeneSetCollection& sets);

struct FilterReport {
  struct Dropped {
    std::string name;
    std::size_t original_size = 0;
    std::size_t restricted_size = 0;
  };
  std::vector<Dropped> dropped;
};

/// Intersect every set with the dataset's gene universe, then drop sets whose
/// restricted size falls outside [min_size, max_size]. Idempotent.
GeneSetCollection restrict_and_filter(const GeneSetCollection& sets,
                                      const ExpressionDataset& ds,
                                      std::size_t min_size, std::size_t max_size,
                                      FilterReport* report = nullptr);

std::unordered_map<std::string_view, std::int32_t>
build_gene_index(const ExpressionDataset& ds);

/// Map set members to dataset row indices (ascending). Throws if a member is
/// absent from the dataset; run restrict_and_filter first.
std::vector<std::vector<std::int32_t>>
map_sets_to_rows(const GeneSetCollection& sets, const ExpressionDataset& ds);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace enrichkit
