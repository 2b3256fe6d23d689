// Dense-or-sparse representation vector. Sparse storage keeps (index, value)
// pairs sorted by index with no explicit zeros.
#pragma once

#include <cstdint>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace tweetprobe {

class RepVector {
 public:
  RepVector() = default;

  static RepVector dense(std::vector<double> values);
  // Entries may arrive unsorted; they are sorted, checked for duplicate
  // indices, and exact zeros are dropped.
  static RepVector sparse(std::size_t dim,
                          std::vector<std::pair<std::uint32_t, double>> entries);
  static RepVector zeros_dense(std::size_t dim);
  static RepVector zeros_sparse(std::size_t dim);

  std::size_t dim() const { return dim_; }
  bool is_sparse() const { return sparse_; }
  const std::vector<double>& dense_values() const { return dense_; }
  const std::vector<std::pair<std::uint32_t, double>>& sparse_entries() const {
    return entries_;
  }

  double at(std::size_t index) const;
  std::vector<double> to_dense() const;

  bool operator==(const RepVector&) const = default;

 private:
  std::size_t dim_ = 0;
  bool sparse_ = false;
  std::vector<double> dense_;
  std::vector<std::pair<std::uint32_t, double>> entries_;
};

// Concatenation in argument order; all parts must share storage kind.
RepVector concat(const std::vector<RepVector>& parts);

// Lossless text round-trip (one vector per line, shortest exact decimals).
std::string vector_to_text(const RepVector& v);
RepVector vector_from_text(const std::string& line);

}  // namespace tweetprobe
