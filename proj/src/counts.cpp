#include "netcomp/counts.hpp"

#include <algorithm>

namespace netcomp {

namespace {

std::vector<SparseCountRow::Entry> sorted_entries(const SparseCountRow& row) {
  std::vector<SparseCountRow::Entry> v(row.entries().begin(), row.entries().end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.component < b.component; });
  return v;
}

// Trailing empty components are not significant when comparing tables.
bool same_dense(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t z = 0; z < n; ++z) {
    std::uint32_t x = z < a.size() ? a[z] : 0;
    std::uint32_t y = z < b.size() ? b[z] : 0;
    if (x != y) return false;
  }
  return true;
}

}  // namespace

bool operator==(const SparseCountRow& a, const SparseCountRow& b) {
  if (a.nonzero() != b.nonzero()) return false;
  auto x = sorted_entries(a);
  auto y = sorted_entries(b);
  return std::equal(x.begin(), x.end(), y.begin(),
                    [](const auto& p, const auto& q) { return p.component == q.component && p.count == q.count; });
}

void IcmcCounts::add(Edge link, ComponentId z) {
  ensure_component(z);
  ++links[z];
  ++total;
  endpoints[link.source].increment(z);
  endpoints[link.target].increment(z);
}

void IcmcCounts::remove(Edge link, ComponentId z) {
  if (z >= links.size() || links[z] == 0 || total == 0) throw CountUnderflow("component link count underflow");
  endpoints[link.source].decrement(z);
  endpoints[link.target].decrement(z);
  --links[z];
  --total;
}

bool operator==(const IcmcCounts& a, const IcmcCounts& b) {
  return a.total == b.total && same_dense(a.links, b.links) && a.endpoints == b.endpoints;
}

void LdaCounts::add(Edge link, ComponentId z) {
  ensure_component(z);
  sender[link.source].increment(z);
  ++sender_totals[link.source];
  receiver[link.target].increment(z);
  ++receiver_totals[z];
  ++total;
}

void LdaCounts::remove(Edge link, ComponentId z) {
  if (z >= receiver_totals.size() || receiver_totals[z] == 0 || sender_totals[link.source] == 0 || total == 0)
    throw CountUnderflow("component link count underflow");
  sender[link.source].decrement(z);
  receiver[link.target].decrement(z);
  --sender_totals[link.source];
  --receiver_totals[z];
  --total;
}

bool operator==(const LdaCounts& a, const LdaCounts& b) {
  return a.total == b.total && a.sender_totals == b.sender_totals && same_dense(a.receiver_totals, b.receiver_totals) &&
         a.sender == b.sender && a.receiver == b.receiver;
}

IcmcCounts tally_icmc(std::size_t nodes, std::span<const Edge> links, std::span<const ComponentId> assignments,
                      std::size_t components) {
  IcmcCounts counts(nodes, components);
  for (std::size_t l = 0; l < links.size(); ++l) counts.add(links[l], assignments[l]);
  return counts;
}

LdaCounts tally_lda(std::size_t nodes, std::span<const Edge> links, std::span<const ComponentId> assignments,
                    std::size_t components) {
  LdaCounts counts(nodes, components);
  for (std::size_t l = 0; l < links.size(); ++l) counts.add(links[l], assignments[l]);
  return counts;
}

bool endpoint_identity_holds(const IcmcCounts& counts) {
  std::vector<std::uint64_t> endpoint_sum(counts.links.size(), 0);
  for (const auto& row : counts.endpoints)
    for (const auto& e : row.entries()) {
      if (e.component >= endpoint_sum.size()) return false;
      endpoint_sum[e.component] += e.count;
    }
  std::uint64_t n = 0;
  for (std::size_t z = 0; z < counts.links.size(); ++z) {
    if (endpoint_sum[z] != 2ull * counts.links[z]) return false;
    n += counts.links[z];
  }
  return n == counts.total;
}

}  // namespace netcomp
