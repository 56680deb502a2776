#include "enrichkit/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "enrichkit/text.hpp"

namespace enrichkit {

namespace {

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw std::runtime_error(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::size_t PhenotypeAssignment::class_count(int cls) const {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), static_cast<std::uint8_t>(cls)));
}

ExpressionDataset parse_gct(std::string_view text, std::string_view source) {
  const auto lines = split_lines(text);
  if (lines.size() < 3)
    fail(source, 1, "truncated file, expected version line, dimensions and header");
  if (lines[0] != "#1.2")
    fail(source, 1, "expected version tag '#1.2', got '" + std::string(lines[0]) + "'");

  const auto dims = split_ws(lines[1]);
  if (dims.size() != 2)
    fail(source, 2, "expected '<genes>\\t<samples>'");
  long long n = 0, m = 0;
  try {
    n = parse_int(dims[0]);
    m = parse_int(dims[1]);
  } catch (const std::exception& e) {
    fail(source, 2, e.what());
  }
  if (n < 1 || m < 1)
    fail(source, 2, "dimensions must be positive");

  const auto header = split(lines[2], '\t');
  if (header.size() != static_cast<std::size_t>(m) + 2)
    fail(source, 3, "header has " + std::to_string(header.size()) +
                        " fields, expected " + std::to_string(m + 2));

  ExpressionDataset ds;
  ds.sample_ids.reserve(m);
  std::unordered_set<std::string_view> seen_samples;
  for (std::size_t c = 2; c < header.size(); ++c) {
    if (header[c].empty())
      fail(source, 3, "empty sample identifier in column " + std::to_string(c + 1));
    if (!seen_samples.insert(header[c]).second)
      fail(source, 3, "duplicate sample identifier '" + std::string(header[c]) + "'");
    ds.sample_ids.emplace_back(header[c]);
  }

  ds.gene_ids.reserve(n);
  ds.values.reserve(static_cast<std::size_t>(n) * m);
  std::vector<std::size_t> row_lines;
  row_lines.reserve(n);

  std::size_t data_rows = 0;
  for (std::size_t li = 3; li < lines.size(); ++li) {
    if (lines[li].empty())
      continue;  // tolerate blank lines
    if (data_rows == static_cast<std::size_t>(n))
      fail(source, li + 1, "more data rows than the declared " + std::to_string(n));
    const auto fields = split(lines[li], '\t');
    if (fields.size() != static_cast<std::size_t>(m) + 2)
      fail(source, li + 1, "row has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(m + 2));
    if (fields[0].empty())
      fail(source, li + 1, "empty gene identifier");
    ds.gene_ids.emplace_back(fields[0]);
    row_lines.push_back(li + 1);
    for (std::size_t c = 2; c < fields.size(); ++c) {
      try {
        ds.values.push_back(parse_double(fields[c]));
      } catch (const std::exception& e) {
        fail(source, li + 1, std::string(e.what()) + " in column " + std::to_string(c + 1));
      }
    }
    ++data_rows;
  }
  if (data_rows != static_cast<std::size_t>(n))
    fail(source, lines.size(), "found " + std::to_string(data_rows) +
                                   " data rows, declared " + std::to_string(n));

  std::unordered_set<std::string_view> seen_genes;
  seen_genes.reserve(n);
  for (std::size_t i = 0; i < ds.gene_ids.size(); ++i)
    if (!seen_genes.insert(ds.gene_ids[i]).second)
      fail(source, row_lines[i], "duplicate gene identifier '" + ds.gene_ids[i] + "'");
  return ds;
}

PhenotypeAssignment parse_cls(std::string_view text, std::string_view source) {
  const auto lines = split_lines(text);
  if (lines.size() < 3)
    fail(source, 1, "truncated file, expected three lines");

  const auto head = split_ws(lines[0]);
  if (head.size() != 3)
    fail(source, 1, "expected '<samples> <classes> 1'");
  long long m = 0, k = 0, one = 0;
  try {
    m = parse_int(head[0]);
    k = parse_int(head[1]);
    one = parse_int(head[2]);
  } catch (const std::exception& e) {
    fail(source, 1, e.what());
  }
  if (k != 2)
    fail(source, 1, "binary phenotype required, header declares " + std::to_string(k) + " classes");
  if (one != 1)
    fail(source, 1, "third header field must be 1");
  if (m < 4)
    fail(source, 1, "need at least 4 samples (2 per class)");

  auto names = split_ws(lines[1]);
  if (names.empty() || names[0] != "#")
    fail(source, 2, "expected '# <name0> <name1>'");
  names.erase(names.begin());
  if (names.size() != 2)
    fail(source, 2, "binary phenotype required, found " + std::to_string(names.size()) + " class names");
  if (names[0] == names[1])
    fail(source, 2, "class names must differ");

  const auto tokens = split_ws(lines[2]);
  if (tokens.size() != static_cast<std::size_t>(m))
    fail(source, 3, "found " + std::to_string(tokens.size()) + " labels, header declares " +
                        std::to_string(m));

  // first distinct label becomes class 0, second becomes class 1
  PhenotypeAssignment ph;
  ph.class_names = {std::string(names[0]), std::string(names[1])};
  std::vector<std::string_view> distinct;
  ph.labels.reserve(tokens.size());
  for (const auto tok : tokens) {
    auto it = std::find(distinct.begin(), distinct.end(), tok);
    if (it == distinct.end()) {
      if (distinct.size() == 2)
        fail(source, 3, "binary phenotype required, found a third label '" + std::string(tok) + "'");
      distinct.push_back(tok);
      it = distinct.end() - 1;
    }
    ph.labels.push_back(static_cast<std::uint8_t>(it - distinct.begin()));
  }
  if (distinct.size() < 2)
    fail(source, 3, "only one class present");
  // when labels are the class names themselves, align names to the mapping
  if (distinct[0] == names[1] && distinct[1] == names[0])
    std::swap(ph.class_names[0], ph.class_names[1]);

  for (int cls = 0; cls < 2; ++cls)
    if (ph.class_count(cls) < 2)
      fail(source, 3, "class '" + ph.class_names[cls] + "' has fewer than 2 members");
  return ph;
}

GeneSetCollection parse_gmt(std::string_view text, std::string_view source) {
  GeneSetCollection coll;
  std::unordered_set<std::string_view> seen_names;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (lines[li].empty())
      continue;
    const auto fields = split(lines[li], '\t');
    if (fields.size() < 3)
      fail(source, li + 1, "empty gene set '" + std::string(fields[0]) + "'");
    GeneSet set;
    set.name = std::string(fields[0]);
    if (set.name.empty())
      fail(source, li + 1, "empty set name");
    std::unordered_set<std::string_view> seen_members;
    for (std::size_t c = 2; c < fields.size(); ++c) {
      if (fields[c].empty())
        continue;  // trailing tabs are common
      if (seen_members.insert(fields[c]).second)
        set.members.emplace_back(fields[c]);
    }
    if (set.members.empty())
      fail(source, li + 1, "empty gene set '" + set.name + "'");
    coll.sets.push_back(std::move(set));
  }
  for (std::size_t i = 0; i < coll.sets.size(); ++i)
    if (!seen_names.insert(coll.sets[i].name).second)
      throw std::runtime_error(std::string(source) + ": duplicate set name '" +
                               coll.sets[i].name + "'");
  return coll;
}

GeneSetCollection restrict_and_filter(const GeneSetCollection& sets,
                                      const ExpressionDataset& ds,
                                      std::size_t min_size, std::size_t max_size,
                                      FilterReport* report) {
  if (min_size < 2)
    throw std::runtime_error("restrict_and_filter: min_size must be >= 2");
  if (max_size < min_size)
    throw std::runtime_error("restrict_and_filter: max_size < min_size");
  const auto index = build_gene_index(ds);

  GeneSetCollection kept;
  for (const auto& set : sets.sets) {
    GeneSet restricted;
    restricted.name = set.name;
    for (const auto& g : set.members)
      if (index.contains(g))
        restricted.members.push_back(g);
    const std::size_t nk = restricted.members.size();
    if (nk < min_size || nk > max_size) {
      if (report)
        report->dropped.push_back({set.name, set.members.size(), nk});
      continue;
    }
    kept.sets.push_back(std::move(restricted));
  }
  return kept;
}

std::unordered_map<std::string_view, std::int32_t>
build_gene_index(const ExpressionDataset& ds) {
  std::unordered_map<std::string_view, std::int32_t> index;
  index.reserve(ds.n_genes());
  for (std::size_t i = 0; i < ds.n_genes(); ++i)
    index.emplace(ds.gene_ids[i], static_cast<std::int32_t>(i));
  return index;
}

std::vector<std::vector<std::int32_t>>
map_sets_to_rows(const GeneSetCollection& sets, const ExpressionDataset& ds) {
  const auto index = build_gene_index(ds);
  std::vector<std::vector<std::int32_t>> rows;
  rows.reserve(sets.size());
  for (const auto& set : sets.sets) {
    std::vector<std::int32_t> r;
    r.reserve(set.members.size());
    for (const auto& g : set.members) {
      auto it = index.find(g);
      if (it == index.end())
        throw std::runtime_error("set '" + set.name + "' member '" + g +
                                 "' is not in the dataset; restrict the collection first");
      r.push_back(it->second);
    }
    std::sort(r.begin(), r.end());
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string write_gct(const ExpressionDataset& ds) {
  std::string out = "#1.2\n";
  out += std::to_string(ds.n_genes()) + "\t" + std::to_string(ds.n_samples()) + "\n";
  out += "Name\tDescription";
  for (const auto& s : ds.sample_ids) {
    out += '\t';
    out += s;
  }
  out += '\n';
  for (std::size_t i = 0; i < ds.n_genes(); ++i) {
    out += ds.gene_ids[i];
    out += "\tna";
    for (const double v : ds.row(i)) {
      out += '\t';
      out += format_full(v);
    }
    out += '\n';
  }
  return out;
}

std::string write_cls(const PhenotypeAssignment& ph) {
  std::string out = std::to_string(ph.n_samples()) + " 2 1\n";
  out += "# " + ph.class_names[0] + " " + ph.class_names[1] + "\n";
  for (std::size_t j = 0; j < ph.labels.size(); ++j) {
    if (j)
      out += ' ';
    out += ph.labels[j] ? '1' : '0';
  }
  out += '\n';
  return out;
}

std::string write_gmt(const GeneSetCollection& sets) {
  std::string out;
  for (const auto& set : sets.sets) {
    out += set.name;
    out += "\tna";
    for (const auto& g : set.members) {
      out += '\t';
      out += g;
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out)
    throw std::runtime_error("write failed for '" + path + "'");
}

ExpressionDataset read_gct(const std::string& path) {
  return parse_gct(read_file(path), path);
}

PhenotypeAssignment read_cls(const std::string& path) {
  return parse_cls(read_file(path), path);
}

GeneSetCollection read_gmt(const std::string& path) {
  return parse_gmt(read_file(path), path);
}

}  // namespace enrichkit
