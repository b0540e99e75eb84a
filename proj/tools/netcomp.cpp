#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "netcomp/evaluation.hpp"
#include "netcomp/network.hpp"
#include "netcomp/oracle.hpp"
#include "netcomp/sampler.hpp"
#include "netcomp/snapshot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace netcomp;

namespace {

constexpr const char* kVersion = "0.1.0";

struct NetworkOptions {
  std::string edges;
  bool directed = false;
  bool symmetrize = false;
  bool giant = false;
  std::string labels;
};

struct FitOptions {
  NetworkOptions net;
  std::string model = "icmc";
  std::string prior = "dirichlet";
  std::size_t k = 2;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> thin;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string path = "auto";
  std::string out;
};

struct LoadedNetwork {
  Network net;
  std::optional<GroundTruth> truth;
};

LoadedNetwork load_network(const NetworkOptions& o) {
  if (o.edges.empty()) throw std::invalid_argument("--edges is required");
  LoadedNetwork result;
  result.net = load_edge_list(o.edges, o.directed);
  if (o.symmetrize && result.net.directed) result.net = symmetrize(result.net);
  if (o.giant) result.net = extract_giant_component(result.net).network;
  if (!o.labels.empty()) {
    // Labels refer to external ids, so they are read against the final network.
    result.truth = load_labels(o.labels, result.net);
  }
  return result;
}

json network_json(const NetworkOptions& o) {
  return {{"edges", o.edges}, {"directed", o.directed}, {"symmetrize", o.symmetrize}, {"giant", o.giant},
          {"labels", o.labels}};
}

Hyperparameters resolve_hyperparameters(const FitOptions& o) {
  const auto model = parse_model(o.model);
  const auto prior = parse_prior(o.prior);
  if (prior == PriorKind::dirichlet) {
    if (o.k < 1) throw std::invalid_argument("--k must be at least 1");
    return Hyperparameters::dirichlet(model, o.k, o.alpha.value_or(1.0 / static_cast<double>(o.k)),
                                      o.beta.value_or(0.01));
  }
  return Hyperparameters::dp(model, o.alpha.value_or(0.3), o.beta.value_or(0.3));
}

SamplingPath parse_path(const std::string& s) {
  if (s == "auto") return SamplingPath::automatic;
  if (s == "flat") return SamplingPath::flat;
  if (s == "tree") return SamplingPath::tree;
  throw std::invalid_argument("unknown sampling path '" + s + "'");
}

// Config files are JSON objects whose keys mirror the long flag names; a fit
// manifest is accepted too (its "config" member is used).
void apply_config(const std::string& file, FitOptions& o) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file);
  json j = json::parse(in);
  if (j.contains("config")) j = j["config"];
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key) && !j[key].is_null()) target = j[key].get<std::decay_t<decltype(target)>>();
  };
  auto get_opt = [&](const char* key, auto& target) {
    if (j.contains(key) && !j[key].is_null()) target = j[key].get<typename std::decay_t<decltype(target)>::value_type>();
  };
  get("edges", o.net.edges);
  get("directed", o.net.directed);
  get("symmetrize", o.net.symmetrize);
  get("giant", o.net.giant);
  get("labels", o.net.labels);
  get("model", o.model);
  get("prior", o.prior);
  get("k", o.k);
  get_opt("alpha", o.alpha);
  get_opt("beta", o.beta);
  get_opt("iterations", o.iterations);
  get_opt("burn-in", o.burn_in);
  get_opt("thin", o.thin);
  get("chains", o.chains);
  get("seed", o.seed);
  get("threads", o.threads);
  get("path", o.path);
  get("out", o.out);
}

void write_trace(const fs::path& file, const ChainResult& r) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "sweep,loo_log_score\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", r.initialization_score);
  out << 0 << ',' << buf << '\n';
  for (std::size_t s = 0; s < r.trace.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.17g", r.trace[s]);
    out << s + 1 << ',' << buf << '\n';
  }
}

int cmd_fit(FitOptions o, const std::string& config_file, const CLI::App& app) {
  if (!config_file.empty()) {
    // Flags given explicitly on the command line override the file.
    FitOptions from_file = o;
    apply_config(config_file, from_file);
    auto given = [&](const char* flag) { return app.count(flag) > 0; };
    if (!given("--edges")) o.net.edges = from_file.net.edges;
    if (!given("--directed")) o.net.directed = from_file.net.directed;
    if (!given("--symmetrize")) o.net.symmetrize = from_file.net.symmetrize;
    if (!given("--giant")) o.net.giant = from_file.net.giant;
    if (!given("--labels")) o.net.labels = from_file.net.labels;
    if (!given("--model")) o.model = from_file.model;
    if (!given("--prior")) o.prior = from_file.prior;
    if (!given("--k")) o.k = from_file.k;
    if (!given("--alpha")) o.alpha = from_file.alpha;
    if (!given("--beta")) o.beta = from_file.beta;
    if (!given("--iterations")) o.iterations = from_file.iterations;
    if (!given("--burn-in")) o.burn_in = from_file.burn_in;
    if (!given("--thin")) o.thin = from_file.thin;
    if (!given("--chains")) o.chains = from_file.chains;
    if (!given("--seed")) o.seed = from_file.seed;
    if (!given("--threads")) o.threads = from_file.threads;
    if (!given("--path")) o.path = from_file.path;
    if (!given("--out")) o.out = from_file.out;
  }
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  if (o.chains < 1) throw std::invalid_argument("--chains must be at least 1");

  const auto hp = resolve_hyperparameters(o);
  const auto path = parse_path(o.path);
  const auto loaded = load_network(o.net);
  const Network& net = loaded.net;

  const std::size_t iterations = o.iterations.value_or(suggested_iterations(net.node_count));
  const std::size_t burn_in = o.burn_in.value_or(iterations / 2);
  const std::size_t thin = o.thin.value_or(std::max<std::size_t>(1, (iterations - std::min(burn_in, iterations)) / 100));
  ChainConfig base{iterations, burn_in, thin, 0};
  base.validate();

  fs::create_directories(o.out);
  std::vector<json> chain_info(o.chains);
  std::vector<std::string> errors;
  std::mutex error_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c; (c = next++) < o.chains;) {
      try {
        ChainConfig cfg = base;
        cfg.seed = derive_seed(o.seed, c);
        const auto start = std::chrono::steady_clock::now();
        auto result = run_chain(net, hp, cfg, path);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string stem = "chain_" + std::to_string(c);
        save_snapshots(fs::path(o.out) / (stem + ".snapshots"), hp, cfg.seed, result.snapshots);
        write_trace(fs::path(o.out) / (stem + ".trace.csv"), result);
        chain_info[c] = {{"index", c},
                         {"seed", cfg.seed},
                         {"snapshots", stem + ".snapshots"},
                         {"trace", stem + ".trace.csv"},
                         {"seconds", seconds},
                         {"seconds_per_sweep", seconds / static_cast<double>(iterations)}};
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        errors.push_back("chain " + std::to_string(c) + ": " + e.what());
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(o.chains, o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency()));
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << '\n';
    return 1;
  }

  json config = network_json(o.net);
  config.update({{"model", std::string(to_string(hp.model))},
                 {"prior", std::string(to_string(hp.prior))},
                 {"k", hp.is_dp() ? std::size_t{0} : hp.components},
                 {"alpha", hp.alpha},
                 {"beta", hp.beta},
                 {"iterations", iterations},
                 {"burn-in", burn_in},
                 {"thin", thin},
                 {"chains", o.chains},
                 {"seed", o.seed},
                 {"path", o.path},
                 {"out", o.out}});
  json manifest = {{"tool", "netcomp"},
                   {"version", kVersion},
                   {"config", config},
                   {"network", {{"nodes", net.node_count}, {"edges", net.edges.size()}}},
                   {"chains", chain_info},
                   {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  std::ofstream(fs::path(o.out) / "manifest.json") << manifest.dump(2) << '\n';
  std::cout << "fitted " << o.chains << " chain(s) of " << iterations << " sweeps; outputs in " << o.out << '\n';
  return 0;
}

struct EvaluateOptions {
  std::string run;
  NetworkOptions net;
  std::vector<std::string> snapshots;
  std::string role = "sender";
  std::string out;
};

std::vector<SnapshotRecord> read_chain(const std::string& file) {
  auto recs = load_snapshots(file);
  if (recs.empty()) throw std::runtime_error(file + " holds no snapshots");
  return recs;
}

std::vector<Snapshot> snapshots_of(const std::vector<SnapshotRecord>& recs) {
  std::vector<Snapshot> s;
  for (const auto& r : recs) s.push_back(r.snapshot);
  return s;
}

// Fills network options and snapshot files from a fit directory.
void apply_run(const std::string& run, NetworkOptions& net, std::vector<std::string>& snapshots,
               const CLI::App& app) {
  std::ifstream in(fs::path(run) / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + run);
  const json m = json::parse(in);
  const auto& c = m.at("config");
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (!given("--edges")) net.edges = c.at("edges").get<std::string>();
  if (!given("--directed")) net.directed = c.at("directed").get<bool>();
  if (!given("--symmetrize")) net.symmetrize = c.at("symmetrize").get<bool>();
  if (!given("--giant")) net.giant = c.at("giant").get<bool>();
  if (!given("--labels")) net.labels = c.at("labels").get<std::string>();
  if (snapshots.empty())
    for (const auto& chain : m.at("chains")) snapshots.push_back((fs::path(run) / chain.at("snapshots").get<std::string>()).string());
}

int cmd_evaluate(EvaluateOptions o, const CLI::App& app) {
  if (!o.run.empty()) apply_run(o.run, o.net, o.snapshots, app);
  if (o.snapshots.empty()) throw std::invalid_argument("no snapshot files given");
  if (o.out.empty()) o.out = o.run.empty() ? "." : o.run;
  const auto loaded = load_network(o.net);
  const Network& net = loaded.net;
  const Network undirected = net.directed ? symmetrize(net) : net;
  const auto role = o.role == "receiver" ? MembershipRole::receiver : MembershipRole::sender;
  if (o.role != "sender" && o.role != "receiver") throw std::invalid_argument("--role must be sender or receiver");
  if (!loaded.truth) std::cerr << "warning: no labels given; reporting modularity only\n";

  fs::create_directories(o.out);
  std::vector<Eigen::MatrixXd> chains;
  std::vector<double> perplexities, modularities;
  std::ofstream per_chain(fs::path(o.out) / "chains.csv");
  per_chain << "chain,snapshots,components,modularity" << (loaded.truth ? ",perplexity" : "") << '\n';
  per_chain.precision(17);
  for (std::size_t c = 0; c < o.snapshots.size(); ++c) {
    const auto recs = read_chain(o.snapshots[c]);
    const auto snaps = snapshots_of(recs);
    const auto m = average_memberships(net, recs.front().hp, snaps, role);
    const std::string stem = "chain_" + std::to_string(c);
    std::ofstream mem(fs::path(o.out) / (stem + ".memberships.csv"));
    write_memberships_csv(mem, net, m);
    const double q = modularity(undirected, hard_partition(m));
    modularities.push_back(q);
    per_chain << c << ',' << snaps.size() << ',' << m.cols() << ',' << q;
    if (loaded.truth) {
      const auto conf = confusion(m, *loaded.truth);
      std::ofstream csv(fs::path(o.out) / (stem + ".confusion.csv"));
      write_confusion_csv(csv, conf, loaded.truth->class_names);
      perplexities.push_back(ground_truth_perplexity(conf));
      per_chain << ',' << perplexities.back();
    }
    per_chain << '\n';
    chains.push_back(m);
  }

  Scores scores;
  scores.modularity = Eigen::Map<const Eigen::VectorXd>(modularities.data(), static_cast<Eigen::Index>(modularities.size())).mean();
  if (loaded.truth) {
    scores.perplexity = Eigen::Map<const Eigen::VectorXd>(perplexities.data(), static_cast<Eigen::Index>(perplexities.size())).mean();
    if (perplexities.size() >= 2) scores.chains = summarize(perplexities);
  }
  std::ofstream js(fs::path(o.out) / "scores.json");
  write_scores_json(js, scores);
  write_scores_json(std::cout, scores);
  if (loaded.truth)
    std::cout << "ground-truth modularity " << modularity(undirected, truth_partition(*loaded.truth)) << '\n';
  return 0;
}

struct PredictOptions {
  NetworkOptions net;
  std::string run;
  std::string snapshots;
  std::string new_edges;
  std::size_t refine = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_predict(PredictOptions o, const CLI::App& app) {
  if (!o.run.empty()) {
    std::vector<std::string> files;
    if (!o.snapshots.empty()) files.push_back(o.snapshots);
    apply_run(o.run, o.net, files, app);
    o.snapshots = files.front();
  }
  if (o.snapshots.empty() || o.new_edges.empty()) throw std::invalid_argument("--snapshots and --new-edges are required");
  const auto loaded = load_network(o.net);
  const Network& net = loaded.net;
  const auto index = net.label_index();

  // "<new-node> <existing-node>" lines, grouped by new node in order of appearance.
  std::ifstream in(o.new_edges);
  if (!in) throw std::runtime_error("cannot open " + o.new_edges);
  std::vector<std::string> order;
  std::map<std::string, std::vector<NodeIndex>> neighbors;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a) || a[0] == '#' || a[0] == '%') continue;
    if (!(ls >> b)) throw ParseError(line_no, "expected '<new-node> <existing-node>'");
    auto it = index.find(b);
    if (it == index.end()) throw ParseError(line_no, "unknown existing node '" + b + "'");
    if (!neighbors.count(a)) order.push_back(a);
    neighbors[a].push_back(it->second);
  }
  if (order.empty()) throw std::invalid_argument("no new links given");

  const auto recs = read_chain(o.snapshots);
  const auto& hp = recs.front().hp;
  Rng rng(o.seed);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw std::runtime_error("cannot write " + o.out);
    out = &file;
  }
  *out << "node,component,probability\n";
  out->precision(17);
  for (const auto& node : order) {
    Eigen::VectorXd sum;
    for (const auto& rec : recs) {
      SamplerState state(net, hp, 0);
      state.restore(rec.snapshot.assignments);
      Eigen::VectorXd p = predict_new_node(state, neighbors[node], o.refine, rng);
      if (sum.size() < p.size()) sum.conservativeResizeLike(Eigen::VectorXd::Zero(p.size()));
      sum.head(p.size()) += p;
    }
    sum /= static_cast<double>(recs.size());
    for (Eigen::Index z = 0; z < sum.size(); ++z)
      if (sum[z] != 0.0) *out << node << ',' << z << ',' << sum[z] << '\n';
  }
  return 0;
}

struct OracleOptions {
  OracleSuiteOptions suite;
  bool mutate_self_link = false;
  std::size_t large_k = 1'000'000;
  double tolerance = 1e-12;
  double large_k_tolerance = 1e-4;
};

int cmd_oracle_check(OracleOptions o) {
  if (o.mutate_self_link)
    o.suite.icmc_kernel = [](std::uint64_t ki, std::uint64_t kj, std::uint64_t n, bool self, const Hyperparameters& hp,
                             std::size_t m) { return icmc_weight<double>(ki, self ? ki : kj, n, false, hp, m); };
  const auto r = run_oracle_suite(o.suite);
  const double large_k = large_k_consistency(o.large_k, 0.3, 0.3, 50);
  std::printf("instances            %zu\n", r.instances);
  std::printf("conditionals         %zu\n", r.conditionals);
  std::printf("icmc dirichlet       %.3e\n", r.icmc_dirichlet);
  std::printf("icmc dp              %.3e\n", r.icmc_dp);
  std::printf("icmc dp urn vs joint %.3e\n", r.icmc_dp_routes);
  std::printf("ssnlda dirichlet     %.3e\n", r.ssnlda_dirichlet);
  std::printf("large-K (K=%zu)  %.3e\n", o.large_k, large_k);
  const bool ok = r.icmc_dirichlet <= o.tolerance && r.icmc_dp <= o.tolerance && r.icmc_dp_routes <= o.tolerance &&
                  r.ssnlda_dirichlet <= o.tolerance && large_k <= o.large_k_tolerance;
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

void add_network_flags(CLI::App* cmd, NetworkOptions& n) {
  cmd->add_option("--edges", n.edges, "Edge list file");
  cmd->add_flag("--directed", n.directed, "Read the edge list as directed");
  cmd->add_flag("--symmetrize", n.symmetrize, "Drop edge directions and collapse duplicate pairs");
  cmd->add_flag("--giant", n.giant, "Keep only the largest connected component");
  cmd->add_option("--labels", n.labels, "Ground-truth label file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Component models for networks: ICMc and SSN-LDA fitted by collapsed Gibbs sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  FitOptions fit;
  std::string fit_config;
  auto* fit_cmd = app.add_subcommand("fit", "Run Gibbs chains and write snapshots, traces and a manifest");
  add_network_flags(fit_cmd, fit.net);
  fit_cmd->add_option("--config", fit_config, "JSON config (keys mirror the flags; a manifest also works)");
  fit_cmd->add_option("--model", fit.model, "icmc or ssnlda")->check(CLI::IsMember({"icmc", "ssnlda", "ssn-lda"}));
  fit_cmd->add_option("--prior", fit.prior, "dirichlet or dp")->check(CLI::IsMember({"dirichlet", "dp"}));
  fit_cmd->add_option("--k", fit.k, "Component count (Dirichlet prior)");
  fit_cmd->add_option("--alpha", fit.alpha, "Dirichlet parameter (default 1/K) or DP concentration (default 0.3)");
  fit_cmd->add_option("--beta", fit.beta, "Node-distribution smoothing (default 0.01, or 0.3 under DP)");
  fit_cmd->add_option("--iterations", fit.iterations, "Sweeps per chain (default 100 log^2 M)");
  fit_cmd->add_option("--burn-in", fit.burn_in, "Sweeps before the first snapshot (default half)");
  fit_cmd->add_option("--thin", fit.thin, "Sweeps between snapshots (default: at most 100 snapshots)");
  fit_cmd->add_option("--chains", fit.chains, "Independent chains");
  fit_cmd->add_option("--seed", fit.seed, "Master seed; chain seeds are derived from it");
  fit_cmd->add_option("--threads", fit.threads, "Worker threads (default: hardware concurrency)");
  fit_cmd->add_option("--path", fit.path, "Sampling path: auto, flat or tree")->check(CLI::IsMember({"auto", "flat", "tree"}));
  fit_cmd->add_option("--out", fit.out, "Output directory");

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score snapshots: memberships, confusion, perplexity, modularity");
  add_network_flags(eval_cmd, eval.net);
  eval_cmd->add_option("--run", eval.run, "Directory written by fit (supplies network flags and snapshot files)");
  eval_cmd->add_option("--snapshots", eval.snapshots, "Snapshot files, one per chain");
  eval_cmd->add_option("--role", eval.role, "SSN-LDA membership role: sender or receiver");
  eval_cmd->add_option("--out", eval.out, "Output directory (default: the run directory)");

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "Memberships of new nodes given their links to existing nodes");
  add_network_flags(pred_cmd, pred.net);
  pred_cmd->add_option("--run", pred.run, "Directory written by fit (uses the first chain)");
  pred_cmd->add_option("--snapshots", pred.snapshots, "Snapshot file");
  pred_cmd->add_option("--new-edges", pred.new_edges, "Lines '<new-node> <existing-node>'")->required();
  pred_cmd->add_option("--refine", pred.refine, "Gibbs passes over the new links");
  pred_cmd->add_option("--seed", pred.seed, "Seed");
  pred_cmd->add_option("--out", pred.out, "Output CSV (default: stdout)");

  OracleOptions orc;
  auto* orc_cmd = app.add_subcommand("oracle-check", "Compare model kernels with exact conditionals on tiny instances");
  orc_cmd->add_option("--instances", orc.suite.instances, "Random instances");
  orc_cmd->add_option("--max-links", orc.suite.max_links, "Largest link count");
  orc_cmd->add_option("--max-nodes", orc.suite.max_nodes, "Largest node count");
  orc_cmd->add_option("--max-components", orc.suite.max_components, "Largest K");
  orc_cmd->add_option("--seed", orc.suite.seed, "Seed");
  orc_cmd->add_option("--large-k", orc.large_k, "K for the Dirichlet-to-DP limit check");
  orc_cmd->add_option("--tolerance", orc.tolerance, "Largest allowed conditional deviation");
  orc_cmd->add_flag("--mutate-self-link", orc.mutate_self_link, "Inject a wrong self-link numerator (must fail)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*fit_cmd) return cmd_fit(fit, fit_config, *fit_cmd);
    if (*eval_cmd) return cmd_evaluate(eval, *eval_cmd);
    if (*pred_cmd) return cmd_predict(pred, *pred_cmd);
    if (*orc_cmd) return cmd_oracle_check(orc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
