#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "netcomp/network.hpp"

namespace netcomp {

using ComponentId = std::uint32_t;

/// Raised when a decrement would drive a tally below zero, which can only
/// happen when assignments and tables have diverged.
class CountUnderflow : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Nonzero (component, count) pairs of one node. Entries are unordered and
/// their number is bounded by the node's degree.
class SparseCountRow {
 public:
  struct Entry {
    ComponentId component;
    std::uint32_t count;
  };

  std::uint32_t get(ComponentId z) const {
    for (const auto& e : entries_)
      if (e.component == z) return e.count;
    return 0;
  }

  void increment(ComponentId z, std::uint32_t by = 1) {
    for (auto& e : entries_)
      if (e.component == z) {
        e.count += by;
        return;
      }
    entries_.push_back({z, by});
  }

  void decrement(ComponentId z, std::uint32_t by = 1) {
    for (auto& e : entries_) {
      if (e.component != z) continue;
      if (e.count < by) break;
      e.count -= by;
      if (e.count == 0) {
        e = entries_.back();
        entries_.pop_back();
      }
      return;
    }
    throw CountUnderflow("sparse count underflow");
  }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t nonzero() const { return entries_.size(); }
  std::size_t memory_bytes() const { return entries_.capacity() * sizeof(Entry); }

  /// Order-insensitive comparison.
  friend bool operator==(const SparseCountRow& a, const SparseCountRow& b);

 private:
  std::vector<Entry> entries_;
};

/// ICMc tallies: links per component (n_z), component-wise endpoint degrees
/// (k_zi) and the total link count (N). A self-link adds 2 to k_zi.
struct IcmcCounts {
  std::vector<std::uint32_t> links;
  std::vector<SparseCountRow> endpoints;
  std::uint64_t total = 0;

  IcmcCounts() = default;
  IcmcCounts(std::size_t nodes, std::size_t components) : links(components, 0), endpoints(nodes) {}

  std::size_t capacity() const { return links.size(); }
  std::uint32_t occupancy(ComponentId z) const { return z < links.size() ? links[z] : 0; }
  void ensure_component(ComponentId z) {
    if (z >= links.size()) links.resize(z + 1, 0);
  }

  void add(Edge link, ComponentId z);
  void remove(Edge link, ComponentId z);

  friend bool operator==(const IcmcCounts& a, const IcmcCounts& b);
};

/// SSN-LDA tallies: sender-component counts n_iz with row sums n_i., and
/// receiver-component counts k_zj (stored per receiver) with sums k_z.
struct LdaCounts {
  std::vector<SparseCountRow> sender;
  std::vector<std::uint32_t> sender_totals;
  std::vector<SparseCountRow> receiver;
  std::vector<std::uint32_t> receiver_totals;
  std::uint64_t total = 0;

  LdaCounts() = default;
  LdaCounts(std::size_t nodes, std::size_t components)
      : sender(nodes), sender_totals(nodes, 0), receiver(nodes), receiver_totals(components, 0) {}

  std::size_t capacity() const { return receiver_totals.size(); }
  std::uint32_t occupancy(ComponentId z) const { return z < receiver_totals.size() ? receiver_totals[z] : 0; }
  void ensure_component(ComponentId z) {
    if (z >= receiver_totals.size()) receiver_totals.resize(z + 1, 0);
  }

  void add(Edge link, ComponentId z);
  void remove(Edge link, ComponentId z);

  friend bool operator==(const LdaCounts& a, const LdaCounts& b);
};

/// Full recount from assignments; the reference every incremental update
/// must agree with.
IcmcCounts tally_icmc(std::size_t nodes, std::span<const Edge> links, std::span<const ComponentId> assignments,
                      std::size_t components = 0);
LdaCounts tally_lda(std::size_t nodes, std::span<const Edge> links, std::span<const ComponentId> assignments,
                    std::size_t components = 0);

/// Checks 2 n_z = sum_i k_zi for every component and N = sum_z n_z.
bool endpoint_identity_holds(const IcmcCounts& counts);

}  // namespace netcomp
