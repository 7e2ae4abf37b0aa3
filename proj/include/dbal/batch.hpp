#ifndef DBAL_BATCH_HPP
#define DBAL_BATCH_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbal/rng.hpp"

namespace dbal {

// An ordered set of labeled stream positions {(i_k, x_k, y_k)} together with
// the seed from which the Rademacher bits xi'_{i_k} are derived. Bits are a
// pure function of (seed, stream index), so the sequence is reproducible
// regardless of query order.
struct LabeledBatch {
  std::vector<std::uint64_t> indices;
  std::vector<double> xs;
  std::vector<int> ys;
  std::uint64_t bits_seed = 0;

  std::size_t size() const { return xs.size(); }
  bool empty() const { return xs.empty(); }

  void append(std::uint64_t stream_index, double x, int y) {
    if (!indices.empty() && stream_index <= indices.back())
      throw std::invalid_argument("stream indices must be strictly increasing");
    indices.push_back(stream_index);
    xs.push_back(x);
    ys.push_back(y);
  }

  int xi(std::size_t k) const { return rademacher_bit(bits_seed, indices[k]); }

  void clear() {
    indices.clear();
    xs.clear();
    ys.clear();
  }
};

}  // namespace dbal

#endif  // DBAL_BATCH_HPP
