#pragma once

// Exact k-nearest-neighbour search over a ball tree.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "concierge/errors.hpp"

namespace concierge {

enum class Metric { euclidean, cosine };

inline std::string_view to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }

inline Metric parse_metric(std::string_view s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  throw InvalidArgument("unknown metric '" + std::string(s) + "' (expected euclidean or cosine)");
}

struct Neighbor {
  std::size_t ordinal = 0;
  double distance = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.ordinal < b.ordinal);
  }
};

/// Cosine distance is 1 - cos, computed as half the squared chord between unit
/// vectors; zero vectors stay zero.
class BallTree {
 public:
  using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BallTree() = default;

  explicit BallTree(const Points& points, int leaf_size = 40, Metric metric = Metric::euclidean)
      : points_(points), leaf_size_(leaf_size), metric_(metric) {
    if (points_.rows() == 0) throw InvalidArgument("ball tree: no vectors to index");
    if (leaf_size_ < 1) throw InvalidArgument("ball tree: leaf_size must be >= 1");
    if (metric_ == Metric::cosine)
      for (Eigen::Index i = 0; i < points_.rows(); ++i) normalize(points_.row(i));
    order_.resize(static_cast<std::size_t>(points_.rows()));
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * order_.size() / static_cast<std::size_t>(leaf_size_) + 1);
    build(0, order_.size());
  }

  std::size_t size() const noexcept { return order_.size(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }
  Metric metric() const noexcept { return metric_; }
  int leaf_size() const noexcept { return leaf_size_; }

  /// k closest entries with excluded[ordinal] false, ordered by (distance, ordinal).
  /// An empty mask excludes nothing.
  std::vector<Neighbor> query(const Eigen::Ref<const Eigen::RowVectorXd>& q, std::size_t k,
                              const std::vector<bool>& excluded = {}) const {
    if (q.size() != points_.cols())
      throw QueryError("query has dimension " + std::to_string(q.size()) + ", index has " +
                       std::to_string(points_.cols()));
    if (!excluded.empty() && excluded.size() != size())
      throw InvalidArgument("exclusion mask size does not match the index");
    Eigen::RowVectorXd query = q;
    if (metric_ == Metric::cosine) normalize(query);

    std::priority_queue<Neighbor> heap;  // worst candidate on top
    if (k > 0) search(0, query, k, excluded, heap);
    std::vector<Neighbor> out(heap.size());
    for (auto i = out.size(); i-- > 0; heap.pop()) out[i] = heap.top();
    if (metric_ == Metric::cosine)
      for (auto& n : out) n.distance = 0.5 * n.distance * n.distance;
    return out;
  }

  /// Distance in the reported units, for oracles and diagnostics.
  double distance(std::size_t ordinal, const Eigen::Ref<const Eigen::RowVectorXd>& q) const {
    Eigen::RowVectorXd query = q;
    if (metric_ == Metric::cosine) normalize(query);
    const double d = (points_.row(static_cast<Eigen::Index>(ordinal)) - query).norm();
    return metric_ == Metric::cosine ? 0.5 * d * d : d;
  }

 private:
  struct Node {
    std::size_t begin, end;
    Eigen::RowVectorXd center;
    double radius;
    int left = -1, right = -1;
  };

  template <class Row>
  static void normalize(Row&& v) {
    const double n = v.norm();
    if (n > 0.0) v /= n;
  }

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end, Eigen::RowVectorXd::Zero(points_.cols()), 0.0});
    Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(points_.cols());
    for (std::size_t i = begin; i < end; ++i) center += points_.row(static_cast<Eigen::Index>(order_[i]));
    center /= static_cast<double>(end - begin);
    double radius = 0.0;
    for (std::size_t i = begin; i < end; ++i)
      radius = std::max(radius, (points_.row(static_cast<Eigen::Index>(order_[i])) - center).norm());
    nodes_[static_cast<std::size_t>(id)].center = center;
    nodes_[static_cast<std::size_t>(id)].radius = radius;
    if (end - begin <= static_cast<std::size_t>(leaf_size_)) return id;

    Eigen::Index axis = 0;
    double spread = -1.0;
    for (Eigen::Index d = 0; d < points_.cols(); ++d) {
      double lo = points_(static_cast<Eigen::Index>(order_[begin]), d), hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = points_(static_cast<Eigen::Index>(order_[i]), d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > spread) {
        spread = hi - lo;
        axis = d;
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                       const double va = points_(static_cast<Eigen::Index>(a), axis);
                       const double vb = points_(static_cast<Eigen::Index>(b), axis);
                       return va < vb || (va == vb && a < b);
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  double lower_bound(const Node& node, const Eigen::RowVectorXd& q) const {
    return std::max(0.0, (q - node.center).norm() - node.radius);
  }

  // Prune only when the bound is clearly past the kth distance, so that an
  // equal-distance entry with a smaller ordinal is never skipped.
  static bool prunable(double bound, std::size_t k, const std::priority_queue<Neighbor>& heap) {
    if (heap.size() < k) return false;
    const double worst = heap.top().distance;
    return bound > worst + 1e-12 * (1.0 + worst);
  }

  void search(int id, const Eigen::RowVectorXd& q, std::size_t k, const std::vector<bool>& excluded,
              std::priority_queue<Neighbor>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t o = order_[i];
        if (!excluded.empty() && excluded[o]) continue;
        const Neighbor cand{o, (points_.row(static_cast<Eigen::Index>(o)) - q).norm()};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      return;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const double bl = lower_bound(l, q), br = lower_bound(r, q);
    const int first = bl <= br ? node.left : node.right;
    const int second = bl <= br ? node.right : node.left;
    const double b1 = std::min(bl, br), b2 = std::max(bl, br);
    if (!prunable(b1, k, heap)) search(first, q, k, excluded, heap);
    if (!prunable(b2, k, heap)) search(second, q, k, excluded, heap);
  }

  Points points_;
  int leaf_size_ = 40;
  Metric metric_ = Metric::euclidean;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace concierge
