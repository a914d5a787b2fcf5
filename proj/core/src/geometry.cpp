#include "vsp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vsp {

double distance(ConstVectorView a, ConstVectorView b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

KdTree::KdTree(std::vector<double> points, std::size_t dim) : dim_(dim), points_(std::move(points)) {
  if (dim_ == 0) throw InvalidArgument("kd-tree dimension must be positive");
  if (points_.empty() || points_.size() % dim_ != 0)
    throw InvalidArgument("kd-tree needs a non-empty row-major point array");
  const auto n = static_cast<std::uint32_t>(size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0U);
  nodes_.reserve(2 * (n / kLeafSize + 1));
  build(0, n);

  leaf_points_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    std::copy_n(points_.begin() + static_cast<std::ptrdiff_t>(order_[i] * dim_), dim_,
                leaf_points_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, begin, end, 0, 0});
  if (end - begin <= kLeafSize) return id;

  // Split on the axis of largest spread.
  int best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = points_[order_[i] * dim_ + d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(d);
    }
  }
  if (best_spread <= 0.0) return id;  // all points identical: keep as one leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto coord = [&](std::uint32_t p) { return points_[p * dim_ + static_cast<std::size_t>(best_dim)]; };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return coord(a) < coord(b); });

  const double split = coord(order_[mid]);
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.split_dim = best_dim;
  node.split_value = split;
  node.left = left;
  node.right = right;
  return id;
}

std::pair<std::size_t, double> KdTree::nearest(ConstVectorView query) const {
  require_dim(query, dim_, "kd-tree query");
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  double best_dist = std::numeric_limits<double>::infinity();
  if (nodes_.size() == 1) {
    scan_leaf(nodes_.front(), query.data(), best_index, best_dist);
    return {best_index, best_dist};
  }
  std::vector<double> offsets(dim_, 0.0);
  search(0, query.data(), 0.0, offsets.data(), best_index, best_dist);
  return {best_index, best_dist};
}

void KdTree::scan_leaf(const Node& node, const double* query, std::size_t& best_index,
                       double& best_dist) const {
  for (std::uint32_t i = node.begin; i < node.end; ++i) {
    const double* p = leaf_points_.data() + static_cast<std::size_t>(i) * dim_;
    double sum = 0.0;
    std::size_t d = 0;
    // Partial distances: stop once the running sum already loses.
    for (; d + 4 <= dim_; d += 4) {
      const double a = query[d] - p[d];
      const double b = query[d + 1] - p[d + 1];
      const double c = query[d + 2] - p[d + 2];
      const double e = query[d + 3] - p[d + 3];
      sum += a * a;
      sum += b * b;
      sum += c * c;
      sum += e * e;
      if (sum > best_dist) break;
    }
    if (sum > best_dist) continue;
    for (; d < dim_; ++d) {
      const double diff = query[d] - p[d];
      sum += diff * diff;
    }
    const std::size_t index = order_[i];
    if (sum < best_dist || (sum == best_dist && index < best_index)) {
      best_dist = sum;
      best_index = index;
    }
  }
}

// `bound` is the squared distance from the query to the node's cell, built up
// from per-axis offsets as the descent crosses splitting planes.
void KdTree::search(std::uint32_t node_id, const double* query, double bound, double* offsets,
                    std::size_t& best_index, double& best_dist) const {
  const Node& node = nodes_[node_id];
  if (node.split_dim < 0) {
    scan_leaf(node, query, best_index, best_dist);
    return;
  }

  // Points left of the split have coordinate <= split_value, right >= split_value,
  // so |diff| lower-bounds the distance to anything on the far side.
  const auto axis = static_cast<std::size_t>(node.split_dim);
  const double diff = query[axis] - node.split_value;
  const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
  const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, query, bound, offsets, best_index, best_dist);

  const double old = offsets[axis];
  const double far_bound = bound - old * old + diff * diff;
  // Equality still descends: a tie on the far side may carry a lower index.
  if (far_bound <= best_dist) {
    offsets[axis] = diff;
    search(far, query, far_bound, offsets, best_index, best_dist);
    offsets[axis] = old;
  }
}

Quantizer::Quantizer(const std::vector<Vector>& codewords, std::optional<Vector> metric_scale)
    : scale_(std::move(metric_scale)) {
  if (codewords.empty()) throw InvalidArgument("quantizer needs at least one codeword");
  dim_ = codewords.front().size();
  if (dim_ == 0) throw InvalidArgument("codeword dimension must be positive");
  if (scale_) {
    require_dim(*scale_, dim_, "metric scale");
    for (const double s : *scale_)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("metric scale entries must be positive");
  }
  codewords_.reserve(codewords.size());
  for (const auto& c : codewords) {
    require_dim(c, dim_, "codeword");
    codewords_.push_back(Codeword{c, codewords_.size()});
  }
  rebuild_index();
}

Vector Quantizer::scaled(ConstVectorView x) const {
  Vector out(x.begin(), x.end());
  if (scale_)
    for (std::size_t i = 0; i < dim_; ++i) out[i] *= (*scale_)[i];
  return out;
}

void Quantizer::rebuild_index() {
  std::vector<double> flat;
  flat.reserve(codewords_.size() * dim_);
  for (const auto& c : codewords_) {
    const Vector s = scaled(c.point);
    flat.insert(flat.end(), s.begin(), s.end());
  }
  tree_ = KdTree(std::move(flat), dim_);
}

std::size_t Quantizer::nearest(ConstVectorView x) const {
  require_dim(x, dim_, "nearest query");
  if (!scale_) return tree_.nearest(x).first;
  return tree_.nearest(scaled(x)).first;
}

std::size_t Quantizer::nearest_linear(ConstVectorView x) const {
  require_dim(x, dim_, "nearest query");
  const Vector q = scaled(x);
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : codewords_) {
    const double d = squared_distance(q, scaled(c.point));
    if (d < best_dist) {
      best_dist = d;
      best = c.index;
    }
  }
  return best;
}

std::map<std::size_t, std::vector<std::size_t>> Quantizer::assign_all(
    const std::vector<Vector>& states) const {
  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < states.size(); ++i) buckets[nearest(states[i])].push_back(i);
  return buckets;
}

double Quantizer::metric_distance(ConstVectorView a, ConstVectorView b) const {
  require_dim(a, dim_, "metric distance");
  require_dim(b, dim_, "metric distance");
  if (!scale_) return distance(a, b);
  return distance(scaled(a), scaled(b));
}

std::size_t Quantizer::add_codeword(ConstVectorView point) {
  require_dim(point, dim_, "add_codeword");
  codewords_.push_back(Codeword{Vector(point.begin(), point.end()), codewords_.size()});
  rebuild_index();
  return codewords_.back().index;
}

void Quantizer::add_codewords(const std::vector<Vector>& points) {
  for (const auto& p : points) require_dim(p, dim_, "add_codewords");
  for (const auto& p : points) codewords_.push_back(Codeword{p, codewords_.size()});
  if (!points.empty()) rebuild_index();
}

}  // namespace vsp
