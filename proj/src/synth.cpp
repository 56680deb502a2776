#include "enrichkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "enrichkit/rng.hpp"
#include "enrichkit/text.hpp"

namespace enrichkit {

void SynthSpec::validate() const {
  if (n_genes < 1)
    throw std::runtime_error("synth: need at least one gene");
  if (n_samples < 4)
    throw std::runtime_error("synth: need at least four samples");
  if (!(sigma > 0.0))
    throw std::runtime_error("synth: sigma must be positive");
  std::size_t block_total = 0;
  for (const auto& b : blocks) {
    if (b.size < 2)
      throw std::runtime_error("synth: block size must be >= 2");
    if (!(b.rho >= 0.0 && b.rho < 1.0))
      throw std::runtime_error("synth: block rho must lie in [0, 1)");
    block_total += b.size;
  }
  if (block_total > n_genes)
    throw std::runtime_error("synth: block sizes exceed the gene count");
  if (n_decoys > 0) {
    std::size_t max_decoy = decoy_size;
    if (max_decoy == 0) {
      max_decoy = 20;
      for (const auto& b : blocks)
        max_decoy = std::max(max_decoy, b.size);
    }
    if (n_genes - block_total < max_decoy)
      throw std::runtime_error("synth: not enough non-block genes for decoy sets");
  }
}

namespace {

std::string padded_number(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed, rng_domain::kSynth, 0);

  SynthData out;
  auto& ds = out.dataset;
  const std::size_t n = spec.n_genes;
  const std::size_t m = spec.n_samples;

  ds.gene_ids.reserve(n);
  const std::size_t gene_width = std::to_string(n).size();
  for (std::size_t i = 0; i < n; ++i)
    ds.gene_ids.push_back("g" + padded_number(i + 1, gene_width));
  ds.sample_ids.reserve(m);
  const std::size_t sample_width = std::to_string(m).size();
  for (std::size_t j = 0; j < m; ++j)
    ds.sample_ids.push_back("s" + padded_number(j + 1, sample_width));

  // balanced two-class design, first half class 0
  auto& ph = out.phenotype;
  ph.class_names = {"A", "B"};
  ph.labels.resize(m);
  const std::size_t n0 = m / 2;
  for (std::size_t j = 0; j < m; ++j)
    ph.labels[j] = j < n0 ? 0 : 1;

  ds.values.assign(n * m, 0.0);
  std::size_t next_gene = 0;
  std::vector<double> shared(m);
  for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    const auto& b = spec.blocks[bi];
    for (std::size_t j = 0; j < m; ++j)
      shared[j] = rng.next_gaussian();
    const double w_shared = std::sqrt(b.rho);
    const double w_own = std::sqrt(1.0 - b.rho);
    for (std::size_t g = 0; g < b.size; ++g, ++next_gene) {
      double* row = ds.values.data() + next_gene * m;
      for (std::size_t j = 0; j < m; ++j) {
        double v = spec.sigma * (w_shared * shared[j] + w_own * rng.next_gaussian());
        if (ph.labels[j] == 0)
          v += b.mean_shift;
        row[j] = v;
      }
    }
  }
  const std::size_t first_background = next_gene;
  for (; next_gene < n; ++next_gene) {
    double* row = ds.values.data() + next_gene * m;
    for (std::size_t j = 0; j < m; ++j)
      row[j] = spec.sigma * rng.next_gaussian();
  }

  // one set per block
  std::size_t gene_at = 0;
  const std::size_t block_width = std::to_string(std::max<std::size_t>(spec.blocks.size(), 1)).size();
  for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    GeneSet set;
    set.name = "BLOCK_" + padded_number(bi + 1, block_width);
    for (std::size_t g = 0; g < spec.blocks[bi].size; ++g)
      set.members.push_back(ds.gene_ids[gene_at++]);
    out.sets.sets.push_back(std::move(set));
  }

  // decoy sets sampled from background genes, sizes cycling the block sizes
  if (spec.n_decoys > 0) {
    std::vector<std::int32_t> pool(n - first_background);
    std::iota(pool.begin(), pool.end(), static_cast<std::int32_t>(first_background));
    const std::size_t decoy_width = std::to_string(spec.n_decoys).size();
    for (std::size_t d = 0; d < spec.n_decoys; ++d) {
      std::size_t size = spec.decoy_size;
      if (size == 0)
        size = spec.blocks.empty() ? 20 : spec.blocks[d % spec.blocks.size()].size;
      // partial Fisher-Yates: the first `size` entries become the draw
      for (std::size_t t = 0; t < size; ++t) {
        const std::size_t j = t + static_cast<std::size_t>(rng.next_below(pool.size() - t));
        std::swap(pool[t], pool[j]);
      }
      GeneSet set;
      set.name = "DECOY_" + padded_number(d + 1, decoy_width);
      for (std::size_t t = 0; t < size; ++t)
        set.members.push_back(ds.gene_ids[pool[t]]);
      std::sort(set.members.begin(), set.members.end());
      out.sets.sets.push_back(std::move(set));
    }
  }
  return out;
}

SynthSpec parse_synth_spec(std::string_view text, std::string_view source) {
  SynthSpec spec;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error(std::string(source) + ":" + std::to_string(li + 1) +
                               ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "genes")
        spec.n_genes = static_cast<std::size_t>(parse_int(value));
      else if (key == "samples")
        spec.n_samples = static_cast<std::size_t>(parse_int(value));
      else if (key == "sigma")
        spec.sigma = parse_double(value);
      else if (key == "seed")
        spec.seed = static_cast<std::uint64_t>(parse_int(value));
      else if (key == "decoys")
        spec.n_decoys = static_cast<std::size_t>(parse_int(value));
      else if (key == "decoy_size")
        spec.decoy_size = static_cast<std::size_t>(parse_int(value));
      else if (key == "block") {
        const auto parts = split(value, ',');
        if (parts.size() != 3)
          throw std::runtime_error("block needs size,rho,mean_shift");
        SynthBlock b;
        b.size = static_cast<std::size_t>(parse_int(parts[0]));
        b.rho = parse_double(parts[1]);
        b.mean_shift = parse_double(parts[2]);
        spec.blocks.push_back(b);
      } else {
        throw std::runtime_error("unknown key '" + std::string(key) + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(source) + ":" + std::to_string(li + 1) +
                               ": " + e.what());
    }
  }
  spec.validate();
  return spec;
}

SynthSpec read_synth_spec(const std::string& path) {
  return parse_synth_spec(read_file(path), path);
}

}  // namespace enrichkit
