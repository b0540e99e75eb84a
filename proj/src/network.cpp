#include "netcomp/network.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace netcomp {

namespace {

bool is_comment_or_blank(std::string_view line) {
  auto pos = line.find_first_not_of(" \t\r");
  if (pos == std::string_view::npos) return true;
  return line[pos] == '#' || line[pos] == '%';
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

Edge oriented(NodeIndex a, NodeIndex b, bool directed) {
  if (directed || a <= b) return {a, b};
  return {b, a};
}

// Union-find with path halving.
struct DisjointSets {
  std::vector<NodeIndex> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), NodeIndex{0}); }
  NodeIndex find(NodeIndex x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(NodeIndex a, NodeIndex b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

void Network::validate() const {
  if (!node_labels.empty() && node_labels.size() != node_count)
    throw std::invalid_argument("node label count does not match node count");
  for (const auto& e : edges) {
    if (e.source >= node_count || e.target >= node_count)
      throw std::invalid_argument("edge endpoint out of range");
    if (!directed && e.source > e.target)
      throw std::invalid_argument("undirected edge not in canonical orientation");
  }
}

std::string Network::label_of(NodeIndex node) const {
  if (node < node_labels.size()) return node_labels[node];
  return std::to_string(node);
}

std::unordered_map<std::string, NodeIndex> Network::label_index() const {
  std::unordered_map<std::string, NodeIndex> index;
  index.reserve(node_count);
  for (NodeIndex i = 0; i < node_count; ++i) index.emplace(label_of(i), i);
  return index;
}

Network Network::undirected(std::size_t node_count, const std::vector<std::pair<NodeIndex, NodeIndex>>& pairs) {
  Network net;
  net.node_count = node_count;
  net.directed = false;
  net.edges.reserve(pairs.size());
  for (auto [a, b] : pairs) net.edges.push_back(oriented(a, b, false));
  net.validate();
  return net;
}

Network Network::directed_from(std::size_t node_count, const std::vector<std::pair<NodeIndex, NodeIndex>>& pairs) {
  Network net;
  net.node_count = node_count;
  net.directed = true;
  net.edges.reserve(pairs.size());
  for (auto [a, b] : pairs) net.edges.push_back({a, b});
  net.validate();
  return net;
}

std::size_t GroundTruth::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(class_of.begin(), class_of.end(), [](const auto& c) { return c.has_value(); }));
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Network parse_edge_list(std::istream& in, bool directed) {
  Network net;
  net.directed = directed;
  std::unordered_map<std::string, NodeIndex> ids;
  auto intern = [&](std::string_view token) {
    auto [it, inserted] = ids.try_emplace(std::string(token), static_cast<NodeIndex>(net.node_labels.size()));
    if (inserted) net.node_labels.emplace_back(token);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto tokens = split_ws(line);
    if (tokens.size() < 2 || tokens.size() > 3) throw ParseError(line_no, "expected '<src> <dst> [multiplicity]'");
    std::uint64_t multiplicity = 1;
    if (tokens.size() == 3) {
      auto tok = tokens[2];
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), multiplicity);
      if (ec != std::errc{} || ptr != tok.data() + tok.size() || multiplicity == 0)
        throw ParseError(line_no, "multiplicity must be a positive integer");
    }
    NodeIndex a = intern(tokens[0]);
    NodeIndex b = intern(tokens[1]);
    for (std::uint64_t w = 0; w < multiplicity; ++w) net.edges.push_back(oriented(a, b, directed));
  }
  net.node_count = net.node_labels.size();
  if (net.edges.empty()) throw EmptyNetworkError("edge list contains no edges");
  return net;
}

Network load_edge_list(const std::filesystem::path& path, bool directed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
  return parse_edge_list(in, directed);
}

void write_edge_list(const Network& net, std::ostream& out) {
  // Runs of identical consecutive edges are written once with a multiplicity.
  for (std::size_t k = 0; k < net.edges.size();) {
    std::size_t run = 1;
    while (k + run < net.edges.size() && net.edges[k + run] == net.edges[k]) ++run;
    out << net.label_of(net.edges[k].source) << ' ' << net.label_of(net.edges[k].target);
    if (run > 1) out << ' ' << run;
    out << '\n';
    k += run;
  }
}

GroundTruth parse_labels(std::istream& in, const Network& net) {
  GroundTruth truth;
  truth.class_of.assign(net.node_count, std::nullopt);
  auto index = net.label_index();
  std::unordered_map<std::string, std::uint32_t> classes;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    auto tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError(line_no, "expected '<node-id> <class-name>'");
    auto node = index.find(std::string(tokens[0]));
    if (node == index.end()) continue;
    auto [it, inserted] = classes.try_emplace(std::string(tokens[1]), static_cast<std::uint32_t>(truth.class_names.size()));
    if (inserted) truth.class_names.emplace_back(tokens[1]);
    truth.class_of[node->second] = it->second;
  }
  return truth;
}

GroundTruth load_labels(const std::filesystem::path& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path.string());
  return parse_labels(in, net);
}

Network symmetrize(const Network& net) {
  Network out;
  out.node_count = net.node_count;
  out.node_labels = net.node_labels;
  out.directed = false;
  std::set<Edge> seen;
  for (const auto& e : net.edges) {
    Edge canonical = oriented(e.source, e.target, false);
    if (seen.insert(canonical).second) out.edges.push_back(canonical);
  }
  return out;
}

ComponentExtraction extract_giant_component(const Network& net) {
  if (net.node_count == 0) throw EmptyNetworkError("cannot extract a component from an empty network");
  DisjointSets sets(net.node_count);
  for (const auto& e : net.edges) sets.unite(e.source, e.target);

  std::vector<std::size_t> nodes_in(net.node_count, 0), edges_in(net.node_count, 0);
  for (NodeIndex i = 0; i < net.node_count; ++i) ++nodes_in[sets.find(i)];
  for (const auto& e : net.edges) ++edges_in[sets.find(e.source)];

  NodeIndex best = 0;
  for (NodeIndex r = 0; r < net.node_count; ++r) {
    if (nodes_in[r] == 0) continue;
    if (nodes_in[r] > nodes_in[best] || (nodes_in[r] == nodes_in[best] && edges_in[r] > edges_in[best])) best = r;
  }

  ComponentExtraction result;
  result.old_to_new.assign(net.node_count, std::nullopt);
  Network& sub = result.network;
  sub.directed = net.directed;
  for (NodeIndex i = 0; i < net.node_count; ++i) {
    if (sets.find(i) != best) continue;
    result.old_to_new[i] = static_cast<NodeIndex>(sub.node_count++);
    if (!net.node_labels.empty()) sub.node_labels.push_back(net.node_labels[i]);
  }
  for (const auto& e : net.edges) {
    if (sets.find(e.source) != best) continue;
    sub.edges.push_back({*result.old_to_new[e.source], *result.old_to_new[e.target]});
  }
  return result;
}

GroundTruth remap(const GroundTruth& truth, const std::vector<std::optional<NodeIndex>>& old_to_new,
                  std::size_t new_node_count) {
  GroundTruth out;
  out.class_names = truth.class_names;
  out.class_of.assign(new_node_count, std::nullopt);
  for (std::size_t old = 0; old < old_to_new.size() && old < truth.class_of.size(); ++old)
    if (old_to_new[old]) out.class_of[*old_to_new[old]] = truth.class_of[old];
  return out;
}

std::size_t connected_component_count(const Network& net) {
  DisjointSets sets(net.node_count);
  for (const auto& e : net.edges) sets.unite(e.source, e.target);
  std::size_t count = 0;
  for (NodeIndex i = 0; i < net.node_count; ++i)
    if (sets.find(i) == i) ++count;
  return count;
}

}  // namespace netcomp
