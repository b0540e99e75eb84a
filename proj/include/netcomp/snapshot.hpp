#pragma once

// Text persistence of assignment snapshots. A file is a sequence of records,
// each two lines:
//
//   snapshot model=<icmc|ssnlda> prior=<dirichlet|dp> k=<K> alpha=<a> beta=<b> seed=<s> sweep=<t> links=<L>
//   <z_0> <z_1> ... <z_{L-1}>
//
// Reals are written with 17 significant digits so they read back exactly.
// Lines starting with '#' are ignored. k is 0 under the DP prior.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "netcomp/hyperparameters.hpp"
#include "netcomp/sampler.hpp"

namespace netcomp {

struct SnapshotRecord {
  Hyperparameters hp;
  std::uint64_t seed = 0;
  Snapshot snapshot;
};

void write_snapshots(std::ostream& out, const Hyperparameters& hp, std::uint64_t seed,
                     std::span<const Snapshot> snapshots);
void save_snapshots(const std::filesystem::path& path, const Hyperparameters& hp, std::uint64_t seed,
                    std::span<const Snapshot> snapshots);

/// Throws ParseError on a malformed record.
std::vector<SnapshotRecord> read_snapshots(std::istream& in);
std::vector<SnapshotRecord> load_snapshots(const std::filesystem::path& path);

}  // namespace netcomp
