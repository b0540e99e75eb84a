#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace netcomp {

/// AA tree keyed by component id in which every node stores its own weight
/// and the total weights of its left and right subtrees. Supports O(log n)
/// weight replacement and weighted sampling by descending from the root.
/// Keys with zero weight are not stored.
template <class Weight = double, class Key = std::uint32_t>
class BasicPartialSumTree {
  static_assert(std::is_arithmetic_v<Weight>);

 public:
  using weight_type = Weight;
  using key_type = Key;

  BasicPartialSumTree() = default;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  Weight total() const { return root_ == nil ? Weight{} : subtree_total(root_); }

  /// Current weight of `key`, zero when absent.
  Weight weight(Key key) const {
    std::int32_t t = root_;
    while (t != nil) {
      const Node& n = nodes_[t];
      if (key < n.key)
        t = n.left;
      else if (n.key < key)
        t = n.right;
      else
        return n.weight;
    }
    return Weight{};
  }

  bool contains(Key key) const { return weight(key) != Weight{}; }

  /// Sets the weight of `key`: inserts when absent, erases when zero.
  void update(Key key, Weight new_weight) {
    if (new_weight < Weight{}) throw std::invalid_argument("partial-sum tree weights must be nonnegative");
    if constexpr (std::is_floating_point_v<Weight>)
      if (!std::isfinite(new_weight)) throw std::invalid_argument("partial-sum tree weights must be finite");
    if (new_weight == Weight{})
      root_ = erase(root_, key);
    else
      root_ = insert(root_, key, new_weight);
  }

  void erase(Key key) { root_ = erase(root_, key); }

  void clear() {
    nodes_.clear();
    free_.clear();
    root_ = nil;
    size_ = 0;
  }

  /// Key whose cumulative interval (ascending key order) contains `u`,
  /// for u in [0, total()). Values at or beyond the total map to the last key.
  Key sample(Weight u) const {
    if (root_ == nil) throw std::logic_error("sampling from an empty partial-sum tree");
    std::int32_t t = root_;
    for (;;) {
      const Node& n = nodes_[t];
      if (u < n.left_sum && n.left != nil) {
        t = n.left;
        continue;
      }
      u -= n.left_sum;
      if (u < n.weight || n.right == nil) return n.key;
      u -= n.weight;
      t = n.right;
    }
  }

  /// In-order traversal.
  void for_each(const std::function<void(Key, Weight)>& fn) const { visit(root_, fn); }

  std::size_t memory_bytes() const { return nodes_.capacity() * sizeof(Node) + free_.capacity() * sizeof(std::int32_t); }

  /// Longest root-to-leaf path, in nodes.
  std::size_t height() const { return height(root_); }

  /// Verifies AA levels, key order and stored subtree sums. Integer weights
  /// must match exactly; floating weights within `relative_tolerance`.
  bool check_invariants(double relative_tolerance = 1e-9) const {
    Weight sum{};
    return check(root_, relative_tolerance, sum);
  }

 private:
  static constexpr std::int32_t nil = -1;

  struct Node {
    Key key;
    Weight weight;
    Weight left_sum;
    Weight right_sum;
    std::int32_t left;
    std::int32_t right;
    std::int32_t level;
  };

  std::vector<Node> nodes_;
  std::vector<std::int32_t> free_;
  std::int32_t root_ = nil;
  std::size_t size_ = 0;

  Weight subtree_total(std::int32_t t) const {
    const Node& n = nodes_[t];
    return n.left_sum + n.weight + n.right_sum;
  }

  std::int32_t level(std::int32_t t) const { return t == nil ? 0 : nodes_[t].level; }

  // Recomputes the child sums of t from its children's stored values.
  void pull(std::int32_t t) {
    Node& n = nodes_[t];
    n.left_sum = n.left == nil ? Weight{} : subtree_total(n.left);
    n.right_sum = n.right == nil ? Weight{} : subtree_total(n.right);
  }

  std::int32_t skew(std::int32_t t) {
    if (t == nil) return t;
    std::int32_t l = nodes_[t].left;
    if (l == nil || nodes_[l].level != nodes_[t].level) return t;
    nodes_[t].left = nodes_[l].right;
    nodes_[l].right = t;
    pull(t);
    pull(l);
    return l;
  }

  std::int32_t split(std::int32_t t) {
    if (t == nil) return t;
    std::int32_t r = nodes_[t].right;
    if (r == nil || nodes_[r].right == nil || nodes_[nodes_[r].right].level != nodes_[t].level) return t;
    nodes_[t].right = nodes_[r].left;
    nodes_[r].left = t;
    ++nodes_[r].level;
    pull(t);
    pull(r);
    return r;
  }

  std::int32_t make_node(Key key, Weight w) {
    Node n{key, w, Weight{}, Weight{}, nil, nil, 1};
    ++size_;
    if (!free_.empty()) {
      std::int32_t id = free_.back();
      free_.pop_back();
      nodes_[id] = n;
      return id;
    }
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t insert(std::int32_t t, Key key, Weight w) {
    if (t == nil) return make_node(key, w);
    if (key < nodes_[t].key) {
      std::int32_t child = insert(nodes_[t].left, key, w);
      nodes_[t].left = child;
    } else if (nodes_[t].key < key) {
      std::int32_t child = insert(nodes_[t].right, key, w);
      nodes_[t].right = child;
    } else {
      nodes_[t].weight = w;
      return t;
    }
    pull(t);
    t = skew(t);
    t = split(t);
    return t;
  }

  std::int32_t erase(std::int32_t t, Key key) {
    if (t == nil) return t;
    if (nodes_[t].key < key) {
      std::int32_t child = erase(nodes_[t].right, key);
      nodes_[t].right = child;
    } else if (key < nodes_[t].key) {
      std::int32_t child = erase(nodes_[t].left, key);
      nodes_[t].left = child;
    } else if (nodes_[t].left == nil && nodes_[t].right == nil) {
      free_.push_back(t);
      --size_;
      return nil;
    } else if (nodes_[t].left == nil) {
      std::int32_t s = nodes_[t].right;
      while (nodes_[s].left != nil) s = nodes_[s].left;
      Key sk = nodes_[s].key;
      Weight sw = nodes_[s].weight;
      std::int32_t child = erase(nodes_[t].right, sk);
      nodes_[t].right = child;
      nodes_[t].key = sk;
      nodes_[t].weight = sw;
    } else {
      std::int32_t p = nodes_[t].left;
      while (nodes_[p].right != nil) p = nodes_[p].right;
      Key pk = nodes_[p].key;
      Weight pw = nodes_[p].weight;
      std::int32_t child = erase(nodes_[t].left, pk);
      nodes_[t].left = child;
      nodes_[t].key = pk;
      nodes_[t].weight = pw;
    }
    pull(t);

    // Rebalance: lower the level if a child fell two levels below.
    std::int32_t should_be = std::min(level(nodes_[t].left), level(nodes_[t].right)) + 1;
    if (should_be < nodes_[t].level) {
      nodes_[t].level = should_be;
      std::int32_t r = nodes_[t].right;
      if (r != nil && should_be < nodes_[r].level) nodes_[r].level = should_be;
    }
    t = skew(t);
    {
      std::int32_t r = skew(nodes_[t].right);
      nodes_[t].right = r;
    }
    if (std::int32_t r = nodes_[t].right; r != nil) {
      std::int32_t rr = skew(nodes_[r].right);
      nodes_[r].right = rr;
    }
    t = split(t);
    {
      std::int32_t r = split(nodes_[t].right);
      nodes_[t].right = r;
    }
    return t;
  }

  void visit(std::int32_t t, const std::function<void(Key, Weight)>& fn) const {
    if (t == nil) return;
    visit(nodes_[t].left, fn);
    fn(nodes_[t].key, nodes_[t].weight);
    visit(nodes_[t].right, fn);
  }

  std::size_t height(std::int32_t t) const {
    if (t == nil) return 0;
    return 1 + std::max(height(nodes_[t].left), height(nodes_[t].right));
  }

  static bool close(Weight stored, Weight actual, double rel) {
    if constexpr (std::is_integral_v<Weight>) {
      (void)rel;
      return stored == actual;
    } else {
      return std::abs(stored - actual) <= rel * std::max<Weight>(std::abs(actual), Weight{1e-300});
    }
  }

  bool check(std::int32_t t, double rel, Weight& sum) const {
    sum = Weight{};
    if (t == nil) return true;
    const Node& n = nodes_[t];
    if (!(n.weight > Weight{})) return false;
    // AA invariants: leaves at level 1, left child one level down, right
    // child same or one down, right grandchild strictly below.
    if (n.left == nil && n.right == nil && n.level != 1) return false;
    if (level(n.left) != n.level - 1) return false;
    if (level(n.right) != n.level && level(n.right) != n.level - 1) return false;
    if (n.right != nil && level(nodes_[n.right].right) >= n.level) return false;
    if (n.left != nil && !(nodes_[n.left].key < n.key)) return false;
    if (n.right != nil && !(n.key < nodes_[n.right].key)) return false;
    Weight ls, rs;
    if (!check(n.left, rel, ls) || !check(n.right, rel, rs)) return false;
    if (!close(n.left_sum, ls, rel) || !close(n.right_sum, rs, rel)) return false;
    sum = ls + n.weight + rs;
    return true;
  }
};

using PartialSumTree = BasicPartialSumTree<double>;

}  // namespace netcomp
