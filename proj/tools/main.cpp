#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "p2pcf/benchgen.hpp"
#include "p2pcf/deca.hpp"
#include "p2pcf/error.hpp"
#include "p2pcf/graph.hpp"
#include "p2pcf/recursive.hpp"
#include "p2pcf/somewhere.hpp"
#include "p2pcf/theory_io.hpp"

using namespace p2pcf;
namespace fs = std::filesystem;

namespace {

enum Exit : int {
  ok = 0,
  findings = 1,  // check found violations, oracle-diff found differences
  usage = 2,
  input = 3,
  resource = 4,
  protocol = 5,
  internal = 70,
};

const char* const kFormats = R"(File formats

Theory file (one per peer):
  p <peer-id>              peer this theory belongs to
  v <name> [target]        vocabulary variable, optionally in the target language
  c <lit> <lit> ...        clause; a literal is `name` or `-name`; bare `c` is the empty clause
  # ...                    comment
  Variables used in clauses but not declared join the vocabulary as non-targets.

Manifest:
  peer <id> <theory-file>  theory path relative to the manifest's directory
  edge <var> <peer> <peer> acquaintance edge labelled with a shared variable
  # ...                    comment

Schema (for encode, rewrite and check --schema):
  peer <id>                                  starts a peer section
  class <P:A> [complete|partial <desc>]      class, optionally defined
  equiv|incl|disjoint <desc> <desc>          ontology axiom over the peer's own classes
  view <P:ViewA> <desc>                      stored extension bounded by desc
  map [incl|equiv|disjoint] <desc> <desc>    mapping with other peers (incl by default)
  individual <name> <P:A>                    assertion, stored and ignored
  # ...                                      comment
  <desc> is `top`, `bottom`, a class name, `(and d...)`, `(or d...)` or `(not d)`.
  Unqualified names belong to the current peer section.

Query output: one clause per line (`a | -b`, `[]` for the empty clause), then
`FINAL` once the asking user has been notified of termination, `TIMEOUT` when
some branch ran out of time to live, or `ABORTED` when --max-deliveries was hit.

Exit status: 0 success, 1 check violations or oracle differences, 2 usage
error, 3 input error, 4 resource cap, 5 protocol violation, 70 internal error.
)";

struct ScheduleFlags {
  std::uint64_t seed = 0;
  std::string policy = "random";
  std::optional<double> timeout_ms;
  std::string cost = "wallclock";
  std::optional<std::size_t> max_deliveries;
  std::size_t workers = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Scheduler seed");
    cmd->add_option("--policy", policy, "Delivery policy: random, per-pair-fifo or lifo")->capture_default_str();
    cmd->add_option("--timeout-ms", timeout_ms, "Time to live of the query in model milliseconds");
    cmd->add_option("--cost-model", cost, "Handler cost: wallclock (measured ms) or unit (1 per delivery)")
        ->capture_default_str();
    cmd->add_option("--max-deliveries", max_deliveries, "Stop the run after this many deliveries");
    cmd->add_option("--workers", workers, "Worker threads; 1 is the deterministic reference scheduler")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  ScheduleConfig config() const {
    ScheduleConfig c;
    c.seed = seed;
    c.policy = parse_policy(policy);
    c.ttl_budget = timeout_ms;
    c.cost = parse_cost_model(cost);
    c.max_deliveries = max_deliveries;
    c.workers = workers;
    return c;
  }
};

ResourceLimits limits_from(std::size_t max_clauses) {
  ResourceLimits l;
  l.max_clauses = max_clauses;
  return l;
}

void print_set(const ClauseSet& s) {
  for (const Clause& c : s) std::cout << to_string(c) << '\n';
}

// --- query ------------------------------------------------------------------

struct QueryArgs {
  std::string manifest, engine = "deca", peer, literal, trace;
  bool minimize = false;
  std::size_t max_clauses = ResourceLimits{}.max_clauses;
  ScheduleFlags schedule;
};

int run_query(const QueryArgs& a) {
  const AcquaintanceGraph g = load_manifest(a.manifest);
  const PeerId peer = PeerId::named(a.peer);
  const Literal q = parse_literal(a.literal);
  const ResourceLimits limits = limits_from(a.max_clauses);
  const RewriteEngine engine = parse_engine(a.engine);
  if (!g.has_peer(peer)) throw InputError("unknown peer " + a.peer);

  if (engine != RewriteEngine::deca) {
    const ClauseSet answers = engine == RewriteEngine::recursive
                                  ? rcf(q, peer, g, limits)
                                  : target_consequences(Clause::unit(q), g, limits);
    print_set(a.minimize ? proper_minimal(answers, g) : answers);
    std::cout << "FINAL" << std::endl;
    return ok;
  }

  std::ofstream trace_file;
  if (!a.trace.empty()) {
    trace_file.open(a.trace);
    if (!trace_file) throw InputError("cannot write " + a.trace);
  }
  std::mutex out_mu;
  AskOptions opts;
  if (!a.minimize) {
    opts.on_answer = [&](const Clause& c) {
      std::lock_guard lock(out_mu);
      std::cout << to_string(c) << std::endl;
    };
  }
  if (trace_file.is_open()) opts.on_trace = [&](const std::string& line) { trace_file << line << '\n'; };

  const DecaNetwork net(g, limits);
  const QueryOutcome out = net.ask(peer, q, a.schedule.config(), opts);
  if (a.minimize) print_set(proper_minimal(ClauseSet(out.answers.begin(), out.answers.end()), g));
  if (out.report.aborted) {
    std::cout << "ABORTED after " << out.report.delivered << " deliveries" << std::endl;
    return resource;
  }
  if (!out.terminated) {
    std::cout << "TIMEOUT " << out.report.dropped << " messages dropped" << std::endl;
    return ok;
  }
  std::cout << "FINAL" << std::endl;
  return ok;
}

// --- gen / bench ------------------------------------------------------------

int run_gen(const GenParams& p, const std::string& out_dir) {
  const GeneratedInstance inst = gen_instance(p);
  const fs::path manifest = write_manifest(inst.graph, out_dir);
  std::size_t shared = 0;
  for (std::size_t s : inst.shared_per_edge) shared += s;
  std::cout << "manifest " << manifest.string() << '\n'
            << "peers " << inst.graph.peer_count() << '\n'
            << "topology_edges " << inst.topology.size() << '\n'
            << "labelled_edges " << inst.graph.edges().size() << '\n'
            << "clauses " << inst.graph.union_clauses().size() << '\n'
            << "mean_shared_per_edge "
            << (inst.topology.empty() ? 0.0 : static_cast<double>(shared) / inst.topology.size()) << '\n'
            << "target_adjustments " << inst.target_adjustments << '\n';
  return ok;
}

struct BenchArgs {
  std::string manifest, report, cdf_dir;
  std::size_t queries = 100;
  std::uint64_t seed = 0;
  std::size_t max_clauses = ResourceLimits{}.max_clauses;
  ScheduleFlags schedule;
};

int run_bench(const BenchArgs& a) {
  const AcquaintanceGraph g = load_manifest(a.manifest);
  CampaignConfig cfg;
  cfg.queries = a.queries;
  cfg.seed = a.seed;
  cfg.schedule = a.schedule.config();
  cfg.limits = limits_from(a.max_clauses);
  const CampaignResult r = run_campaign(g, cfg);
  if (!a.report.empty()) {
    std::ofstream csv(a.report);
    if (!csv) throw InputError("cannot write " + a.report);
    write_campaign_csv(csv, r);
  }
  if (!a.cdf_dir.empty()) {
    fs::create_directories(a.cdf_dir);
    std::ofstream depth(fs::path(a.cdf_dir) / "depth_cdf.csv");
    write_cdf(depth, "depth", r.depth_cdf);
    std::ofstream width(fs::path(a.cdf_dir) / "width_cdf.csv");
    write_cdf(width, "mean_width", r.width_cdf);
  }
  write_summary(std::cout, r.summary);
  return ok;
}

// --- encode / rewrite / check ---------------------------------------------

int run_encode(const std::string& schema, const std::string& out_dir) {
  const AcquaintanceGraph g = prop_encode_schema(read_schema(schema));
  std::cout << "manifest " << write_manifest(g, out_dir).string() << '\n';
  return ok;
}

struct RewriteArgs {
  std::string schema, query, peer, engine = "deca";
  bool all = false;
  std::uint64_t seed = 0;
  std::size_t max_clauses = ResourceLimits{}.max_clauses;
};

int run_rewrite(const RewriteArgs& a) {
  const NetworkSchema s = read_schema(a.schema);
  RewriteOptions opts;
  opts.engine = parse_engine(a.engine);
  opts.maximal_only = !a.all;
  opts.seed = a.seed;
  opts.limits = limits_from(a.max_clauses);
  const ClassDescription q = parse_description(a.query, a.peer);
  for (const auto& r : rewritings(q, PeerId::named(a.peer), s, opts)) std::cout << to_string(r) << '\n';
  std::cout << "FINAL" << std::endl;
  return ok;
}

int run_check(const std::string& manifest, const std::string& schema) {
  bool clean = true;
  if (!manifest.empty()) {
    const AcquaintanceGraph g = load_manifest(manifest);
    const PathPropertyReport path = check_path_property(g);
    std::cout << "path-property " << (path.holds ? "ok" : "violated") << '\n';
    for (const Edge& w : path.witnesses) {
      std::cout << "  no " << w.label.name() << "-path between " << w.a.name() << " and " << w.b.name()
                << '\n';
    }
    const auto bad = g.target_inconsistencies();
    std::cout << "target-consistency " << (bad.empty() ? "ok" : "violated") << '\n';
    for (const Edge& e : bad) {
      std::cout << "  " << e.label.name() << " is a target at "
                << (g.is_target(e.a, e.label) ? e.a.name() : e.b.name()) << " but not at "
                << (g.is_target(e.a, e.label) ? e.b.name() : e.a.name()) << '\n';
    }
    clean = path.holds && bad.empty();
  }
  if (!schema.empty()) {
    const SatisfiabilityReport r = check_schema_satisfiability(read_schema(schema));
    std::cout << "schema " << (r.satisfiable ? "satisfiable" : "unsatisfiable") << '\n';
    if (!r.satisfiable) {
      std::cout << "  contradiction when " << r.failed_at->name() << " joined, found by "
                << (r.found_by_consequence_finding ? "consequence finding" : "the fallback check")
                << '\n';
      clean = false;
    }
  }
  return clean ? ok : findings;
}

// --- oracle-diff ------------------------------------------------------------

struct DiffArgs {
  std::string manifest, peer, literal;
  std::size_t instances = 50;
  std::uint64_t seed = 0;
  std::size_t max_clauses = ResourceLimits{}.max_clauses;
};

// Prints the clauses of each engine missing from the oracle's set and the
// other way round. Returns true when all three agree.
bool diff_one(const std::string& label, const AcquaintanceGraph& g, PeerId peer, Literal q,
              std::uint64_t seed, const ResourceLimits& limits) {
  const ClauseSet oracle = target_consequences(Clause::unit(q), g, limits);
  const ClauseSet rec = proper_minimal(rcf(q, peer, g, limits), g);
  ScheduleConfig cfg;
  cfg.seed = seed;
  const QueryOutcome out = DecaNetwork(g, limits).ask(peer, q, cfg);
  const ClauseSet deca = proper_minimal(ClauseSet(out.answers.begin(), out.answers.end()), g);

  bool same = true;
  auto report = [&](const char* engine, const ClauseSet& s) {
    for (const Clause& c : s) {
      if (!oracle.contains(c)) {
        std::cout << "  " << engine << " only: " << to_string(c) << '\n';
        same = false;
      }
    }
    for (const Clause& c : oracle) {
      if (!s.contains(c)) {
        std::cout << "  " << engine << " misses: " << to_string(c) << '\n';
        same = false;
      }
    }
  };
  std::cout << label << " peer " << peer.name() << " literal " << to_string(q) << " oracle "
            << oracle.size() << '\n';
  report("deca", deca);
  report("recursive", rec);
  if (!out.terminated) {
    std::cout << "  deca did not terminate\n";
    same = false;
  }
  return same;
}

int run_oracle_diff(const DiffArgs& a) {
  const ResourceLimits limits = limits_from(a.max_clauses);
  bool clean = true;
  if (!a.manifest.empty()) {
    if (a.peer.empty() || a.literal.empty()) throw InputError("--manifest needs --peer and --literal");
    const AcquaintanceGraph g = load_manifest(a.manifest);
    if (!g.has_peer(PeerId::named(a.peer))) throw InputError("unknown peer " + a.peer);
    clean = diff_one("manifest", g, PeerId::named(a.peer), parse_literal(a.literal), a.seed, limits);
  } else {
    std::mt19937_64 rng(a.seed);
    auto pick = [&](std::size_t lo, std::size_t hi) {
      return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    for (std::size_t i = 0; i < a.instances; ++i) {
      // Sparse enough that the union is usually satisfiable; otherwise every
      // engine returns nothing and the comparison says little.
      GeneratedInstance inst;
      do {
        GenParams p;
        p.np = pick(4, 8);
        p.k = 2;
        p.pr = 0.2;
        p.n = pick(4, 8);
        p.m = pick(1, p.n / 2 + 1);
        p.t = pick((p.n + 1) / 2, p.n);
        p.q = 1;
        p.pct3cnf = 0.3;
        p.seed = rng();
        inst = gen_instance(p);
      } while (!is_satisfiable(inst.graph.union_clauses()));
      const auto peers = inst.graph.peers();
      const PeerId peer = peers[pick(0, peers.size() - 1)];
      const auto& vocab = inst.graph.peer(peer).theory.vocabulary();
      const Variable v = *std::next(vocab.begin(), static_cast<std::ptrdiff_t>(pick(0, vocab.size() - 1)));
      const Literal q(v, pick(0, 1) == 1);
      clean = diff_one("instance " + std::to_string(i), inst.graph, peer, q, rng(), limits) && clean;
    }
  }
  std::cout << (clean ? "no differences" : "DIFFERENCES FOUND") << '\n';
  return clean ? ok : findings;
}

// Maps the innermost library error to an exit status.
int classify(const std::exception& e) {
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return classify(inner);
  }
  if (dynamic_cast<const InputError*>(&e)) return input;
  if (dynamic_cast<const ResourceLimitError*>(&e)) return resource;
  if (dynamic_cast<const ProtocolError*>(&e)) return protocol;
  if (dynamic_cast<const CLI::Error*>(&e)) return usage;
  return internal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consequence finding over networks of propositional peers"};
  app.footer(kFormats);
  app.require_subcommand(1);

  GenParams gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random small-world network of theories");
  gen_cmd->add_option("--np", gen.np, "Peers")->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "Ring degree (even, < np)")->capture_default_str();
  gen_cmd->add_option("--pr", gen.pr, "Rewiring probability")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Own variables per peer")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Local 2-clauses per peer")->capture_default_str();
  gen_cmd->add_option("--t", gen.t, "Target variables per peer")->capture_default_str();
  gen_cmd->add_option("--q", gen.q, "Mapping clauses per edge")->capture_default_str();
  gen_cmd->add_option("--pct3cnf", gen.pct3cnf, "Probability of a third literal in a mapping clause")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("-o,--out", gen_out, "Output directory")->required();

  std::string schema_in, encode_out;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a schema network as propositional theories");
  encode_cmd->add_option("schema", schema_in, "Schema file")->required()->check(CLI::ExistingFile);
  encode_cmd->add_option("-o,--out", encode_out, "Output directory for manifest.txt and theories")
      ->required();

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Ask a literal at a peer and stream its consequences");
  query_cmd->add_option("--manifest", query.manifest, "Network manifest or its directory")->required()->check(CLI::ExistingPath);
  query_cmd->add_option("--engine", query.engine, "deca, recursive or oracle")->capture_default_str();
  query_cmd->add_option("--peer", query.peer, "Peer receiving the query")->required();
  query_cmd->add_option("--literal", query.literal, "Query literal, `name` or `-name`")->required();
  query_cmd->add_flag("--minimize", query.minimize,
                      "Print only the minimal non-trivial answers, once the run is over");
  query_cmd->add_option("--trace", query.trace,
                        "Write one line per delivered message: seq sender receiver kind hist-depth payload");
  query_cmd->add_option("--max-clauses", query.max_clauses, "Clause cap for local reasoning")
      ->capture_default_str();
  query.schedule.add(query_cmd);

  RewriteArgs rewrite;
  auto* rewrite_cmd = app.add_subcommand("rewrite", "Rewrite a class query in terms of stored views");
  rewrite_cmd->add_option("--schema", rewrite.schema, "Schema file")->required()->check(CLI::ExistingFile);
  rewrite_cmd->add_option("--query", rewrite.query, "Class description")->required();
  rewrite_cmd->add_option("--peer", rewrite.peer, "Peer receiving the query")->required();
  rewrite_cmd->add_option("--engine", rewrite.engine, "deca, recursive or oracle")->capture_default_str();
  rewrite_cmd->add_flag("--all", rewrite.all, "Keep non-maximal rewritings too");
  rewrite_cmd->add_option("--seed", rewrite.seed, "Scheduler seed");
  rewrite_cmd->add_option("--max-clauses", rewrite.max_clauses, "Clause cap")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a random query campaign and report metrics");
  bench_cmd->add_option("--manifest", bench.manifest, "Network manifest or its directory")->required()->check(CLI::ExistingPath);
  bench_cmd->add_option("--queries", bench.queries, "Number of queries")->capture_default_str();
  bench_cmd->add_option("--report", bench.report, "Per-query CSV report");
  bench_cmd->add_option("--cdf-dir", bench.cdf_dir, "Directory for depth and width CDF tables");
  bench_cmd->add_option("--campaign-seed", bench.seed, "Seed of the query draw")->capture_default_str();
  bench_cmd->add_option("--max-clauses", bench.max_clauses, "Clause cap")->capture_default_str();
  bench.schedule.add(bench_cmd);

  std::string check_manifest, check_schema;
  auto* check_cmd = app.add_subcommand("check", "Path property, target consistency, schema satisfiability");
  check_cmd->add_option("--manifest", check_manifest, "Network manifest or its directory")->check(CLI::ExistingPath);
  check_cmd->add_option("--schema", check_schema, "Schema file")->check(CLI::ExistingFile);

  DiffArgs diff;
  auto* diff_cmd = app.add_subcommand("oracle-diff", "Compare the three engines after minimization");
  diff_cmd->add_option("--manifest", diff.manifest, "Network manifest; otherwise random instances")
      ->check(CLI::ExistingPath);
  diff_cmd->add_option("--peer", diff.peer, "Peer receiving the query (with --manifest)");
  diff_cmd->add_option("--literal", diff.literal, "Query literal (with --manifest)");
  diff_cmd->add_option("--instances", diff.instances, "Random instances to compare")->capture_default_str();
  diff_cmd->add_option("--seed", diff.seed, "Seed")->capture_default_str();
  diff_cmd->add_option("--max-clauses", diff.max_clauses, "Clause cap")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }
  if (*check_cmd && check_manifest.empty() && check_schema.empty()) {
    std::cerr << "check: give --manifest, --schema or both\n";
    return usage;
  }

  try {
    if (*gen_cmd) return run_gen(gen, gen_out);
    if (*encode_cmd) return run_encode(schema_in, encode_out);
    if (*query_cmd) return run_query(query);
    if (*rewrite_cmd) return run_rewrite(rewrite);
    if (*bench_cmd) return run_bench(bench);
    if (*check_cmd) return run_check(check_manifest, check_schema);
    if (*diff_cmd) return run_oracle_diff(diff);
  } catch (const std::exception& e) {
    std::cout.flush();
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* fault = dynamic_cast<const HandlerFault*>(&e)) {
      std::cerr << "  while handling: " << fault->message_trace() << '\n';
      try {
        std::rethrow_if_nested(e);
      } catch (const std::exception& inner) {
        std::cerr << "  cause: " << inner.what() << '\n';
      }
    }
    return classify(e);
  }
  return usage;
}
