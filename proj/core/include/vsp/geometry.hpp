#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vsp/types.hpp"

namespace vsp {

struct Codeword {
  Vector point;
  std::size_t index = 0;

  friend bool operator==(const Codeword&, const Codeword&) = default;
};

// Static kd-tree over a flat row-major point array. Answers exact nearest
// neighbor queries; equal distances resolve to the lowest point index, the
// same answer an exhaustive scan gives.
class KdTree {
 public:
  KdTree() = default;
  KdTree(std::vector<double> points, std::size_t dim);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : points_.size() / dim_; }
  std::size_t dimension() const noexcept { return dim_; }

  // Index of the nearest point and its squared distance.
  std::pair<std::size_t, double> nearest(ConstVectorView query) const;

 private:
  struct Node {
    // Leaf when split_dim < 0; [begin, end) indexes into order_.
    int split_dim = -1;
    double split_value = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const double* query, double bound, double* offsets,
              std::size_t& best_index, double& best_dist) const;
  void scan_leaf(const Node& node, const double* query, std::size_t& best_index, double& best_dist) const;

  static constexpr std::uint32_t kLeafSize = 8;

  std::size_t dim_ = 0;
  std::vector<double> points_;
  std::vector<std::uint32_t> order_;
  std::vector<double> leaf_points_;  // points_ permuted into order_, for contiguous leaf scans
  std::vector<Node> nodes_;
};

// Voronoi quantizer: a non-empty ordered codeword set plus a kd-tree index.
// Distances are raw Euclidean unless a per-dimension metric scale is given,
// in which case every coordinate difference is multiplied by its scale first.
class Quantizer {
 public:
  explicit Quantizer(const std::vector<Vector>& codewords,
                     std::optional<Vector> metric_scale = std::nullopt);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return codewords_.size(); }
  const std::vector<Codeword>& codewords() const noexcept { return codewords_; }
  const Codeword& codeword(std::size_t index) const { return codewords_.at(index); }
  const std::optional<Vector>& metric_scale() const noexcept { return scale_; }

  std::size_t nearest(ConstVectorView x) const;
  // Exhaustive scan; reference answer for nearest().
  std::size_t nearest_linear(ConstVectorView x) const;

  // Bucket key is the codeword index, value the positions of the states that
  // map to it. Every position appears exactly once.
  std::map<std::size_t, std::vector<std::size_t>> assign_all(
      const std::vector<Vector>& states) const;

  // Distance under the quantizer's metric.
  double metric_distance(ConstVectorView a, ConstVectorView b) const;

  std::size_t add_codeword(ConstVectorView point);
  // Appends all points, then rebuilds the index once.
  void add_codewords(const std::vector<Vector>& points);

  friend bool operator==(const Quantizer& a, const Quantizer& b) {
    return a.dim_ == b.dim_ && a.codewords_ == b.codewords_ && a.scale_ == b.scale_;
  }

 private:
  Vector scaled(ConstVectorView x) const;
  void rebuild_index();

  std::size_t dim_ = 0;
  std::vector<Codeword> codewords_;
  std::optional<Vector> scale_;
  KdTree tree_;
};

}  // namespace vsp
