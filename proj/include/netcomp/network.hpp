#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace netcomp {

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex source = 0;
  NodeIndex target = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Node-indexed multigraph. Undirected networks store every edge as
/// (min, max); repeated edges encode integer link weights.
struct Network {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  bool directed = false;
  /// External identifier of each node, indexed by node. May be empty for
  /// programmatically built networks.
  std::vector<std::string> node_labels;

  std::size_t link_count() const { return edges.size(); }

  /// Throws std::invalid_argument when an endpoint is out of range or an
  /// undirected edge is not in canonical orientation.
  void validate() const;

  std::string label_of(NodeIndex node) const;
  std::unordered_map<std::string, NodeIndex> label_index() const;

  /// Builds an undirected network from index pairs, canonicalizing each edge.
  static Network undirected(std::size_t node_count, const std::vector<std::pair<NodeIndex, NodeIndex>>& pairs);
  static Network directed_from(std::size_t node_count, const std::vector<std::pair<NodeIndex, NodeIndex>>& pairs);
};

/// Class index per node; nullopt marks unlabeled nodes.
struct GroundTruth {
  std::vector<std::optional<std::uint32_t>> class_of;
  std::vector<std::string> class_names;

  std::size_t class_count() const { return class_names.size(); }
  std::size_t labeled_count() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyNetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads "<src> <dst> [multiplicity]" lines. Lines starting with '#' or '%'
/// are comments. Node ids are interned in first-appearance order.
Network parse_edge_list(std::istream& in, bool directed);
Network load_edge_list(const std::filesystem::path& path, bool directed);

/// Writes one line per edge using node labels when present. Reading the
/// output back with the same `directed` flag reproduces the network.
void write_edge_list(const Network& net, std::ostream& out);

/// Reads "<node-id> <class-name>" lines. Ids absent from `net` are skipped
/// (they are typically nodes removed by preprocessing).
GroundTruth parse_labels(std::istream& in, const Network& net);
GroundTruth load_labels(const std::filesystem::path& path, const Network& net);

/// Undirected simple version of `net`: orientation is dropped and all
/// duplicate pairs collapse to a single edge. Self-loops are kept.
Network symmetrize(const Network& net);

struct ComponentExtraction {
  Network network;
  /// old node index -> new node index, nullopt for dropped nodes.
  std::vector<std::optional<NodeIndex>> old_to_new;
};

/// Induced subgraph on the largest weakly connected component (ties broken
/// by edge count, then by lowest node index). Nodes keep their relative order.
ComponentExtraction extract_giant_component(const Network& net);

GroundTruth remap(const GroundTruth& truth, const std::vector<std::optional<NodeIndex>>& old_to_new,
                  std::size_t new_node_count);

/// Number of weakly connected components (isolated nodes count as components).
std::size_t connected_component_count(const Network& net);

}  // namespace netcomp
