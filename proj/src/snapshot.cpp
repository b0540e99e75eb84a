#include "netcomp/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace netcomp {

namespace {

std::string exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T parse_number(const std::string& text, std::size_t line, const char* field) {
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      value = std::stod(text, &used);
      if (used == text.size()) return value;
    } catch (const std::exception&) {
    }
  } else {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size()) return value;
  }
  throw ParseError(line, std::string("bad value for ") + field + ": '" + text + "'");
}

}  // namespace

void write_snapshots(std::ostream& out, const Hyperparameters& hp, std::uint64_t seed,
                     std::span<const Snapshot> snapshots) {
  for (const auto& s : snapshots) {
    out << "snapshot model=" << to_string(hp.model) << " prior=" << to_string(hp.prior)
        << " k=" << (hp.is_dp() ? 0 : hp.components) << " alpha=" << exact(hp.alpha) << " beta=" << exact(hp.beta)
        << " seed=" << seed << " sweep=" << s.sweep << " links=" << s.assignments.size() << '\n';
    for (std::size_t l = 0; l < s.assignments.size(); ++l) {
      if (l) out << ' ';
      out << s.assignments[l];
    }
    out << '\n';
  }
}

void save_snapshots(const std::filesystem::path& path, const Hyperparameters& hp, std::uint64_t seed,
                    std::span<const Snapshot> snapshots) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_snapshots(out, hp, seed, snapshots);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

std::vector<SnapshotRecord> read_snapshots(std::istream& in) {
  std::vector<SnapshotRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    std::string tag;
    header >> tag;
    if (tag != "snapshot") throw ParseError(line_no, "expected a snapshot header");
    std::map<std::string, std::string> fields;
    for (std::string kv; header >> kv;) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError(line_no, "expected key=value, got '" + kv + "'");
      fields[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const char* key : {"model", "prior", "k", "alpha", "beta", "seed", "sweep", "links"})
      if (!fields.count(key)) throw ParseError(line_no, std::string("missing field ") + key);

    SnapshotRecord rec;
    try {
      rec.hp.model = parse_model(fields["model"]);
      rec.hp.prior = parse_prior(fields["prior"]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    rec.hp.components = parse_number<std::size_t>(fields["k"], line_no, "k");
    rec.hp.alpha = parse_number<double>(fields["alpha"], line_no, "alpha");
    rec.hp.beta = parse_number<double>(fields["beta"], line_no, "beta");
    rec.seed = parse_number<std::uint64_t>(fields["seed"], line_no, "seed");
    rec.snapshot.sweep = parse_number<std::size_t>(fields["sweep"], line_no, "sweep");
    const auto links = parse_number<std::size_t>(fields["links"], line_no, "links");
    try {
      rec.hp.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }

    if (!std::getline(in, line)) throw ParseError(line_no + 1, "missing assignment line");
    ++line_no;
    std::istringstream body(line);
    rec.snapshot.assignments.reserve(links);
    for (std::string tok; body >> tok;)
      rec.snapshot.assignments.push_back(parse_number<ComponentId>(tok, line_no, "assignment"));
    if (rec.snapshot.assignments.size() != links)
      throw ParseError(line_no, "expected " + std::to_string(links) + " assignments");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SnapshotRecord> load_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshots(in);
}

}  // namespace netcomp
