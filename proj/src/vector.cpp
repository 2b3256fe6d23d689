#include "tweetprobe/vector.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "tweetprobe/error.hpp"

namespace tweetprobe {

RepVector RepVector::dense(std::vector<double> values) {
  RepVector v;
  v.dim_ = values.size();
  v.sparse_ = false;
  v.dense_ = std::move(values);
  return v;
}

RepVector RepVector::sparse(
    std::size_t dim, std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<std::uint32_t, double>> kept;
  kept.reserve(entries.size());
  for (const auto& [index, value] : entries) {
    if (index >= dim) {
      fail(ErrorKind::DimensionMismatch, "sparse index out of range");
    }
    if (!kept.empty() && kept.back().first == index) {
      fail(ErrorKind::DimensionMismatch, "duplicate sparse index");
    }
    if (value != 0.0) kept.emplace_back(index, value);
  }
  RepVector v;
  v.dim_ = dim;
  v.sparse_ = true;
  v.entries_ = std::move(kept);
  return v;
}

RepVector RepVector::zeros_dense(std::size_t dim) {
  return dense(std::vector<double>(dim, 0.0));
}

RepVector RepVector::zeros_sparse(std::size_t dim) {
  return sparse(dim, {});
}

double RepVector::at(std::size_t index) const {
  if (index >= dim_) fail(ErrorKind::DimensionMismatch, "index out of range");
  if (!sparse_) return dense_[index];
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const auto& entry, std::size_t i) { return entry.first < i; });
  if (it != entries_.end() && it->first == index) return it->second;
  return 0.0;
}

std::vector<double> RepVector::to_dense() const {
  if (!sparse_) return dense_;
  std::vector<double> out(dim_, 0.0);
  for (const auto& [index, value] : entries_) out[index] = value;
  return out;
}

RepVector concat(const std::vector<RepVector>& parts) {
  if (parts.empty()) return RepVector();
  bool sparse = parts.front().is_sparse();
  std::size_t dim = 0;
  for (const auto& part : parts) {
    if (part.is_sparse() != sparse) {
      fail(ErrorKind::DimensionMismatch, "mixed dense/sparse concatenation");
    }
    dim += part.dim();
  }
  if (!sparse) {
    std::vector<double> values;
    values.reserve(dim);
    for (const auto& part : parts) {
      values.insert(values.end(), part.dense_values().begin(),
                    part.dense_values().end());
    }
    return RepVector::dense(std::move(values));
  }
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t offset = 0;
  for (const auto& part : parts) {
    for (const auto& [index, value] : part.sparse_entries()) {
      entries.emplace_back(offset + index, value);
    }
    offset += static_cast<std::uint32_t>(part.dim());
  }
  return RepVector::sparse(dim, std::move(entries));
}

std::string vector_to_text(const RepVector& v) {
  std::string out = v.is_sparse() ? "sparse" : "dense";
  out += ' ';
  out += std::to_string(v.dim());
  if (v.is_sparse()) {
    for (const auto& [index, value] : v.sparse_entries()) {
      out += ' ';
      out += std::to_string(index);
      out += ':';
      out += detail::format_double(value);
    }
  } else {
    for (double value : v.dense_values()) {
      out += ' ';
      out += detail::format_double(value);
    }
  }
  return out;
}

RepVector vector_from_text(const std::string& line) {
  auto parts = detail::split_view(line, ' ');
  if (parts.size() < 2) fail(ErrorKind::MalformedLine, "vector text too short");
  std::size_t dim = detail::parse_u64(parts[1], "vector dim");
  if (parts[0] == "dense") {
    if (parts.size() != dim + 2) {
      fail(ErrorKind::DimensionMismatch, "dense vector value count");
    }
    std::vector<double> values(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      values[i] = detail::parse_double(parts[i + 2], "vector value");
    }
    return RepVector::dense(std::move(values));
  }
  if (parts[0] == "sparse") {
    std::vector<std::pair<std::uint32_t, double>> entries;
    entries.reserve(parts.size() - 2);
    for (std::size_t i = 2; i < parts.size(); ++i) {
      if (parts[i].empty()) continue;
      auto fields = detail::split_view(parts[i], ':');
      if (fields.size() != 2) {
        fail(ErrorKind::MalformedLine, "sparse entry format");
      }
      entries.emplace_back(
          static_cast<std::uint32_t>(detail::parse_u64(fields[0], "index")),
          detail::parse_double(fields[1], "value"));
    }
    return RepVector::sparse(dim, std::move(entries));
  }
  fail(ErrorKind::MalformedLine, "unknown vector storage tag");
}

}  // namespace tweetprobe
