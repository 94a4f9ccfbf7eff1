#include "regraft/data/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "regraft/error.hpp"
#include "regraft/ndcore/rng.hpp"

namespace regraft::data {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features.select_rows(rows);
  out.targets = targets.select_rows(rows);
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.scaler = scaler;
  return out;
}

void Dataset::validate() const {
  if (features.rows() != targets.rows()) throw InvalidArgument("Dataset: feature and target row counts differ");
  if (targets.cols() != 1) throw InvalidArgument("Dataset: targets must be a single column");
  if (!feature_names.empty() && feature_names.size() != features.cols())
    throw InvalidArgument("Dataset: feature name count does not match feature columns");
  if (scaler) {
    for (double s : scaler->feature_std)
      if (!(s > 0.0)) throw InvalidArgument("Dataset: scaler standard deviations must be positive");
  }
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset parse_csv(const std::string& text, const TargetColumn& target) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: missing header row", 1);
  std::vector<std::string> header;
  for (auto& h : split_commas(line)) header.push_back(trim(h));
  const std::size_t cols = header.size();

  std::size_t tcol = cols;
  if (const auto* name = std::get_if<std::string>(&target)) {
    for (std::size_t c = 0; c < cols; ++c)
      if (header[c] == *name) tcol = c;
    if (tcol == cols) {
      std::string avail;
      for (std::size_t c = 0; c < cols; ++c) avail += (c ? ", " : "") + header[c];
      throw InvalidArgument("csv: target column '" + *name + "' not found; available columns: " + avail);
    }
  } else {
    tcol = std::get<std::size_t>(target);
    if (tcol >= cols) throw InvalidArgument("csv: target column index " + std::to_string(tcol) + " out of range");
  }
  if (cols < 2) throw InvalidArgument("csv: need at least one feature column and a target column");

  std::vector<double> feats, targs;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != cols) {
      throw ParseError("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(cols),
                       line_no);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string cell = trim(cells[c]);
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("csv: non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column '" +
                             header[c] + "'",
                         line_no);
      }
      (c == tcol ? targs : feats).push_back(v);
    }
  }
  Dataset ds;
  ds.features = Tensor2(row, cols - 1, std::move(feats));
  ds.targets = Tensor2(row, 1, std::move(targs));
  for (std::size_t c = 0; c < cols; ++c)
    if (c != tcol) ds.feature_names.push_back(header[c]);
  ds.target_name = header[tcol];
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("csv: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), target);
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("csv: cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < ds.dim(); ++c)
    out << (c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c)) << ',';
  out << ds.target_name << '\n';
  char buf[40];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < ds.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(r, c));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", ds.targets[r]);
    out << buf << '\n';
  }
}

namespace {

// Population mean and standard deviation of column `c` (pass cols = 1 for targets).
std::pair<double, double> column_stats(const Tensor2& t, std::size_t c) {
  const double n = static_cast<double>(t.rows());
  double mean = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) mean += t(r, c);
  mean /= n;
  double var = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double d = t(r, c) - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / n)};
}

std::string column_name(const Dataset& ds, std::size_t c) {
  return c < ds.feature_names.size() ? ds.feature_names[c] : "column " + std::to_string(c);
}

}  // namespace

Scaler fit_scaler(const Dataset& ds, bool scale_target) {
  if (ds.size() == 0) throw InvalidArgument("standardize: empty dataset");
  Scaler s;
  s.target_scaled = scale_target;
  for (std::size_t c = 0; c < ds.dim(); ++c) {
    auto [m, sd] = column_stats(ds.features, c);
    if (!(sd > 0.0)) throw InvalidArgument("standardize: column '" + column_name(ds, c) + "' has zero variance");
    s.feature_mean.push_back(m);
    s.feature_std.push_back(sd);
  }
  if (scale_target) {
    auto [m, sd] = column_stats(ds.targets, 0);
    if (!(sd > 0.0)) throw InvalidArgument("standardize: target column '" + ds.target_name + "' has zero variance");
    s.target_mean = m;
    s.target_std = sd;
  }
  return s;
}

Dataset apply_scaler(const Dataset& ds, const Scaler& s) {
  if (s.feature_mean.size() != ds.dim()) throw InvalidArgument("apply_scaler: scaler width mismatch");
  Dataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t c = 0; c < out.dim(); ++c)
      out.features(r, c) = (out.features(r, c) - s.feature_mean[c]) / s.feature_std[c];
  if (s.target_scaled)
    for (double& v : out.targets.values()) v = (v - s.target_mean) / s.target_std;
  out.scaler = s;
  return out;
}

Dataset standardize(const Dataset& ds, bool scale_target) { return apply_scaler(ds, fit_scaler(ds, scale_target)); }

Dataset inverse_transform(const Dataset& ds) {
  if (!ds.scaler) throw InvalidArgument("inverse_transform: dataset carries no scaler");
  const Scaler& s = *ds.scaler;
  Dataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t c = 0; c < out.dim(); ++c)
      out.features(r, c) = out.features(r, c) * s.feature_std[c] + s.feature_mean[c];
  if (s.target_scaled)
    for (double& v : out.targets.values()) v = v * s.target_std + s.target_mean;
  out.scaler.reset();
  return out;
}

void SplitSpec::validate(std::size_t n) const {
  if (train_count >= n) {
    throw InvalidArgument("split: train count " + std::to_string(train_count) + " must be below dataset size " +
                          std::to_string(n));
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw InvalidArgument("split: validation fraction must lie in (0,1)");
}

Split split(const Dataset& ds, const SplitSpec& spec) {
  const std::size_t n = ds.size();
  spec.validate(n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nd::Rng rng(spec.seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_int(i)]);
  const std::size_t rest = n - spec.train_count;
  const auto n_val = static_cast<std::size_t>(std::floor(spec.validation_fraction * static_cast<double>(rest)));
  Split s;
  const auto b = idx.begin();
  s.train_rows.assign(b, b + static_cast<std::ptrdiff_t>(spec.train_count));
  s.validation_rows.assign(b + static_cast<std::ptrdiff_t>(spec.train_count),
                           b + static_cast<std::ptrdiff_t>(spec.train_count + n_val));
  s.test_rows.assign(b + static_cast<std::ptrdiff_t>(spec.train_count + n_val), idx.end());
  s.train = ds.subset(s.train_rows);
  s.validation = ds.subset(s.validation_rows);
  s.test = ds.subset(s.test_rows);
  return s;
}

DomainStats domain_stats(const Dataset& ds) {
  if (ds.size() == 0) throw InvalidArgument("domain_stats: empty dataset");
  DomainStats st;
  for (std::size_t c = 0; c < ds.dim(); ++c) {
    auto [m, sd] = column_stats(ds.features, c);
    st.mean.push_back(m);
    st.stddev.push_back(sd);
  }
  return st;
}

namespace {

std::uint32_t be32(const std::string& b, std::size_t off) {
  return (std::uint32_t(static_cast<unsigned char>(b[off])) << 24) |
         (std::uint32_t(static_cast<unsigned char>(b[off + 1])) << 16) |
         (std::uint32_t(static_cast<unsigned char>(b[off + 2])) << 8) |
         std::uint32_t(static_cast<unsigned char>(b[off + 3]));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("idx: cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Dataset parse_idx(const std::string& img, const std::string& lab) {
  if (img.size() < 16) throw ParseError("idx: image file truncated (header)", 0);
  if (lab.size() < 8) throw ParseError("idx: label file truncated (header)", 0);
  if (be32(img, 0) != 0x00000803) throw ParseError("idx: bad image magic number", 0);
  if (be32(lab, 0) != 0x00000801) throw ParseError("idx: bad label magic number", 0);
  const std::size_t n = be32(img, 4), h = be32(img, 8), w = be32(img, 12);
  const std::size_t n_lab = be32(lab, 4);
  if (n != n_lab) {
    throw ParseError("idx: " + std::to_string(n) + " images but " + std::to_string(n_lab) + " labels", 0);
  }
  if (img.size() < 16 + n * h * w) throw ParseError("idx: image file truncated", 0);
  if (lab.size() < 8 + n) throw ParseError("idx: label file truncated", 0);
  Dataset ds;
  ds.features = Tensor2(n, h * w);
  ds.targets = Tensor2(n, 1);
  for (std::size_t i = 0; i < n * h * w; ++i)
    ds.features[i] = static_cast<double>(static_cast<unsigned char>(img[16 + i])) / 255.0;
  for (std::size_t i = 0; i < n; ++i) ds.targets[i] = static_cast<double>(static_cast<unsigned char>(lab[8 + i]));
  for (std::size_t c = 0; c < h * w; ++c) ds.feature_names.push_back("p" + std::to_string(c));
  ds.target_name = "label";
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_idx(slurp(images), slurp(labels));
}

}  // namespace regraft::data
