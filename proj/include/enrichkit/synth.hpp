#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "enrichkit/dataio.hpp"

namespace enrichkit {

struct SynthBlock {
  std::size_t size = 0;
  double rho = 0.0;        // within-block correlation, [0, 1)
  double mean_shift = 0.0; // added to class-0 samples of block genes
};

/// Controlled synthetic data: equicorrelated Gaussian blocks over a balanced
/// two-class design, i.i.d. background genes, one set per block plus decoys.
struct SynthSpec {
  std::size_t n_genes = 2000;
  std::size_t n_samples = 30;
  std::vector<SynthBlock> blocks;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::size_t n_decoys = 0;
  std::size_t decoy_size = 0;  // 0: cycle block sizes, or 20 with no blocks

  void validate() const;  // throws on violation
};

struct SynthData {
  ExpressionDataset dataset;
  PhenotypeAssignment phenotype;
  GeneSetCollection sets;
};

/// Deterministic in spec.seed. Block genes follow the one-factor
/// equicorrelated construction x = sqrt(rho) * shared + sqrt(1 - rho) * own,
/// scaled by sigma; decoy sets draw without replacement from non-block genes.
SynthData generate(const SynthSpec& spec);

/// key = value lines; keys: genes, samples, sigma, seed, decoys, decoy_size,
/// and repeatable block = size,rho,mean_shift. '#' starts a comment.
SynthSpec parse_synth_spec(std::string_view text, std::string_view source = "spec");
SynthSpec read_synth_spec(const std::string& path);

}  // namespace enrichkit
