#include "plain/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace plain {

namespace {

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
  throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

long parse_long(std::string_view text, bool& ok) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  ok = (ec == std::errc{} && ptr == text.data() + text.size());
  return value;
}

double parse_double(std::string_view text, bool& ok) {
  // from_chars for double is unreliable across standard libraries; strtod is.
  std::string buf(text);
  char* end = nullptr;
  double value = std::strtod(buf.c_str(), &end);
  ok = (end == buf.c_str() + buf.size() && !buf.empty());
  return value;
}

std::vector<int> parse_label_list(std::string_view text, Index label_count,
                                  const std::filesystem::path& path,
                                  std::size_t line_no, const char* which) {
  std::vector<int> ids;
  if (text.empty()) return ids;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view tok = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    bool ok = false;
    long id = parse_long(tok, ok);
    if (!ok || id < 0)
      fail_line(path, line_no, std::string("bad ") + which + " label id '" + std::string(tok) + "'");
    if (id >= label_count)
      fail_line(path, line_no, std::string(which) + " label id " + std::to_string(id) +
                                   " out of range (L=" + std::to_string(label_count) + ")");
    ids.push_back(static_cast<int>(id));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail_line(path, line_no, std::string("duplicate ") + which + " label id");
  return ids;
}

}  // namespace

void DatasetMeta::validate() const {
  if (n < 1 || d < 1 || L < 2)
    throw DataError("invalid dataset shape: n=" + std::to_string(n) +
                    " d=" + std::to_string(d) + " L=" + std::to_string(L));
}

void Dataset::validate() const {
  meta.validate();
  if (features.rows() != meta.n || features.cols() != meta.d ||
      candidates.rows() != meta.n || candidates.cols() != meta.L)
    throw DataError("dataset matrices disagree with meta");
  for (Index i = 0; i < meta.n; ++i) {
    if (candidates.row(i).sum() == 0)
      throw DataError("example " + std::to_string(i) + " has an empty candidate set");
  }
  if (truth) {
    if (truth->rows() != meta.n || truth->cols() != meta.L)
      throw DataError("truth matrix disagrees with meta");
    for (Index i = 0; i < meta.n; ++i)
      for (Index j = 0; j < meta.L; ++j)
        if ((*truth)(i, j) > candidates(i, j))
          throw DataError("truth label " + std::to_string(j) + " of example " +
                          std::to_string(i) + " is not a candidate");
  }
}

std::vector<int> FoldPlan::test_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FoldPlan::train_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(static_cast<int>(i));
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");

  DatasetMeta meta;
  {
    std::istringstream header(line);
    if (!(header >> meta.n >> meta.d >> meta.L))
      fail_line(path, 1, "header must be three integers `n d L`");
    std::string rest;
    if (header >> rest) fail_line(path, 1, "trailing content in header");
    meta.validate();
  }

  Dataset ds;
  ds.meta = meta;
  ds.features = Matrix::Zero(meta.n, meta.d);
  ds.candidates = IntMatrix::Zero(meta.n, meta.L);
  IntMatrix truth = IntMatrix::Zero(meta.n, meta.L);
  bool any_truth = false;

  for (Index i = 0; i < meta.n; ++i) {
    std::size_t line_no = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line))
      throw DataError(path.string() + ": expected " + std::to_string(meta.n) +
                      " example lines, found " + std::to_string(i));
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);

    std::size_t space = view.find(' ');
    std::string_view label_block = view.substr(0, space);
    std::size_t bar = label_block.find('|');
    if (bar == std::string_view::npos) fail_line(path, line_no, "missing `|` separator");

    auto cand_ids = parse_label_list(label_block.substr(0, bar), meta.L, path, line_no, "candidate");
    auto truth_ids = parse_label_list(label_block.substr(bar + 1), meta.L, path, line_no, "truth");
    if (cand_ids.empty()) fail_line(path, line_no, "empty candidate set");
    for (int id : cand_ids) ds.candidates(i, id) = 1;
    for (int id : truth_ids) {
      if (!ds.candidates(i, id))
        fail_line(path, line_no, "truth label " + std::to_string(id) + " is not a candidate");
      truth(i, id) = 1;
    }
    if (!truth_ids.empty()) any_truth = true;

    long prev_index = -1;
    std::size_t pos = (space == std::string_view::npos) ? view.size() : space + 1;
    while (pos < view.size()) {
      while (pos < view.size() && view[pos] == ' ') ++pos;
      if (pos >= view.size()) break;
      std::size_t end = view.find(' ', pos);
      if (end == std::string_view::npos) end = view.size();
      std::string_view entry = view.substr(pos, end - pos);
      std::size_t colon = entry.find(':');
      if (colon == std::string_view::npos)
        fail_line(path, line_no, "feature entry '" + std::string(entry) + "' lacks `:`");
      bool ok_idx = false, ok_val = false;
      long index = parse_long(entry.substr(0, colon), ok_idx);
      double value = parse_double(entry.substr(colon + 1), ok_val);
      if (!ok_idx || !ok_val)
        fail_line(path, line_no, "malformed feature entry '" + std::string(entry) + "'");
      if (index < 0 || index >= meta.d)
        fail_line(path, line_no, "feature index " + std::to_string(index) +
                                     " out of range (d=" + std::to_string(meta.d) + ")");
      if (index <= prev_index)
        fail_line(path, line_no, "feature indices must be strictly increasing");
      prev_index = index;
      ds.features(i, index) = value;
      pos = end + 1;
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.find_first_not_of(" \r\t") != std::string::npos)
      throw DataError(path.string() + ": content after the declared " +
                      std::to_string(meta.n) + " examples");
  }

  if (any_truth) ds.truth = std::move(truth);

  if (normalize) {
    for (Index i = 0; i < meta.n; ++i) {
      double norm = ds.features.row(i).norm();
      if (norm > 0.0)
        ds.features.row(i) /= norm;
      else
        ++ds.zero_norm_rows;
    }
    if (ds.zero_norm_rows > 0)
      std::fprintf(stderr, "warning: %d feature row(s) have zero norm and were left as zeros\n",
                   ds.zero_norm_rows);
  }

  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << ds.meta.n << ' ' << ds.meta.d << ' ' << ds.meta.L << '\n';
  char buf[64];
  for (Index i = 0; i < ds.meta.n; ++i) {
    bool first = true;
    for (Index j = 0; j < ds.meta.L; ++j)
      if (ds.candidates(i, j)) {
        if (!first) out << ',';
        out << j;
        first = false;
      }
    out << '|';
    if (ds.truth) {
      first = true;
      for (Index j = 0; j < ds.meta.L; ++j)
        if ((*ds.truth)(i, j)) {
          if (!first) out << ',';
          out << j;
          first = false;
        }
    }
    for (Index j = 0; j < ds.meta.d; ++j) {
      double v = ds.features(i, j);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ' ' << j << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Dataset synthesize_pml(const Dataset& clean, const SynthConfig& cfg) {
  if (cfg.r < 1) throw DataError("synthesis needs r >= 1");
  if (!clean.truth) throw DataError("synthesis needs ground-truth labels");
  if (clean.candidates != *clean.truth)
    throw DataError("synthesis expects clean data with candidates == truth");

  Dataset out = clean;
  std::mt19937_64 rng(cfg.seed);
  const Index L = clean.meta.L;

  std::vector<int> complement;
  for (Index i = 0; i < clean.meta.n; ++i) {
    complement.clear();
    for (Index j = 0; j < L; ++j)
      if (!(*clean.truth)(i, j)) complement.push_back(static_cast<int>(j));
    if (static_cast<Index>(complement.size()) == L)
      throw DataError("example " + std::to_string(i) +
                      " has no true labels; irrelevant labels are undefined");

    if (static_cast<int>(complement.size()) < cfg.r) {
      out.candidates.row(i).setOnes();
      continue;
    }
    // partial Fisher-Yates for r draws without replacement
    for (int t = 0; t < cfg.r; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, complement.size() - 1);
      std::swap(complement[t], complement[pick(rng)]);
      out.candidates(i, complement[t]) = 1;
    }
  }
  out.validate();
  return out;
}

FoldPlan make_folds(const DatasetMeta& meta, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw DataError("fold_count must be at least 2");
  if (fold_count > meta.n)
    throw DataError("fold_count " + std::to_string(fold_count) + " exceeds n=" +
                    std::to_string(meta.n));
  std::vector<int> order(meta.n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.fold_count = fold_count;
  plan.assignments.assign(meta.n, 0);
  for (Index i = 0; i < meta.n; ++i)
    plan.assignments[order[i]] = static_cast<int>(i % fold_count);
  return plan;
}

Dataset select_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.meta = ds.meta;
  out.meta.n = static_cast<Index>(rows.size());
  out.features.resize(out.meta.n, ds.meta.d);
  out.candidates.resize(out.meta.n, ds.meta.L);
  if (ds.truth) out.truth = IntMatrix(out.meta.n, ds.meta.L);
  for (Index i = 0; i < out.meta.n; ++i) {
    out.features.row(i) = ds.features.row(rows[i]);
    out.candidates.row(i) = ds.candidates.row(rows[i]);
    if (ds.truth) out.truth->row(i) = ds.truth->row(rows[i]);
  }
  out.zero_norm_rows = 0;
  return out;
}

}  // namespace plain
