#include "p2pcf/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "p2pcf/deca.hpp"
#include "p2pcf/error.hpp"

namespace p2pcf {

namespace {

using Rng = std::mt19937_64;

// Independent streams derived from one user seed.
Rng stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

std::size_t uniform(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

TopologyEdge normalized(std::size_t a, std::size_t b) { return a < b ? TopologyEdge{a, b} : TopologyEdge{b, a}; }

Variable private_variable(std::size_t peer, std::size_t j) {
  return Variable::named("x" + std::to_string(peer) + "_" + std::to_string(j));
}

PeerId peer_name(std::size_t i) { return PeerId::named("p" + std::to_string(i)); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

void validate(const GenParams& p) {
  auto fail = [](const std::string& what) { throw InputError("invalid generator parameters: " + what); };
  if (p.np == 0 || p.n == 0 || p.q == 0) fail("np, n and q must be positive");
  if (p.k == 0 || p.k % 2 != 0 || p.k >= p.np) fail("k must be even, positive and below np");
  if (p.t > p.n) fail("t must not exceed n");
  if (!(p.pr >= 0 && p.pr <= 1) || !(p.pct3cnf >= 0 && p.pct3cnf <= 1)) fail("pr and pct3cnf must lie in [0,1]");
  if (p.m > 2 * p.n * (p.n - 1)) fail("m exceeds the number of distinct 2-clauses over n variables");
  if (p.pct3cnf > 0 && p.n < 2) fail("3-literal mapping clauses need n >= 2");
}

std::vector<TopologyEdge> gen_topology(std::size_t np, std::size_t k, double pr, std::uint64_t seed) {
  if (k == 0 || k % 2 != 0 || k >= np) throw InputError("k must be even, positive and below np");
  Rng rng = stream(seed, 1);
  std::vector<TopologyEdge> edges;
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 1; j <= k / 2; ++j) edges.push_back(normalized(i, (i + j) % np));
  std::set<TopologyEdge> present(edges.begin(), edges.end());

  for (auto& e : edges) {
    if (!coin(rng, pr)) continue;
    bool move_a = false, move_b = false;
    while (!move_a && !move_b) {
      move_a = coin(rng);
      move_b = coin(rng);
    }
    // Redraw until the rewired edge is new; give up on saturated graphs.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::size_t a = move_a ? uniform(rng, np) : e.first;
      const std::size_t b = move_b ? uniform(rng, np) : e.second;
      if (a == b) continue;
      const TopologyEdge r = normalized(a, b);
      if (r == e) break;
      if (present.contains(r)) continue;
      present.erase(e);
      present.insert(r);
      e = r;
      break;
    }
  }
  return edges;
}

std::vector<TopologyEdge> gen_uniform_topology(std::size_t np, std::size_t edges, std::uint64_t seed) {
  if (np < 2 || edges > np * (np - 1) / 2) throw InputError("too many edges for a simple graph");
  Rng rng = stream(seed, 2);
  std::set<TopologyEdge> present;
  std::vector<TopologyEdge> out;
  while (out.size() < edges) {
    const std::size_t a = uniform(rng, np), b = uniform(rng, np);
    if (a == b) continue;
    const TopologyEdge e = normalized(a, b);
    if (present.insert(e).second) out.push_back(e);
  }
  return out;
}

double clustering_coefficient(std::size_t np, const std::vector<TopologyEdge>& edges) {
  std::vector<std::set<std::size_t>> adj(np);
  for (auto [a, b] : edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  double total = 0;
  for (std::size_t v = 0; v < np; ++v) {
    const std::vector<std::size_t> nb(adj[v].begin(), adj[v].end());
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) links += adj[nb[i]].contains(nb[j]);
    total += 2.0 * static_cast<double>(links) / static_cast<double>(nb.size() * (nb.size() - 1));
  }
  return np ? total / static_cast<double>(np) : 0;
}

GeneratedInstance gen_instance(const GenParams& p) {
  validate(p);
  GeneratedInstance out;
  out.topology = gen_topology(p.np, p.k, p.pr, p.seed);
  Rng rng = stream(p.seed, 3);

  std::vector<Theory> theories(p.np);
  std::vector<std::set<Variable>> own_targets(p.np);
  for (std::size_t i = 0; i < p.np; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) theories[i].add_variable(private_variable(i, j));
    std::set<Clause> local;
    while (local.size() < p.m) {
      const std::size_t a = uniform(rng, p.n);
      std::size_t b = uniform(rng, p.n);
      if (a == b) continue;
      local.insert(Clause{Literal(private_variable(i, a), coin(rng)), Literal(private_variable(i, b), coin(rng))});
    }
    for (const Clause& c : local) theories[i].add_clause(c);
    std::vector<std::size_t> idx(p.n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < p.t; ++j) own_targets[i].insert(private_variable(i, idx[j]));
  }

  struct Label {
    Variable v;
    std::size_t a, b;
  };
  std::vector<Label> labels;
  for (auto [a, b] : out.topology) {
    std::set<Clause> mapping;
    std::set<Variable> used;
    while (mapping.size() < p.q) {
      const std::size_t ia = uniform(rng, p.n), ib = uniform(rng, p.n);
      std::vector<Literal> lits{Literal(private_variable(a, ia), coin(rng)),
                                Literal(private_variable(b, ib), coin(rng))};
      if (coin(rng, p.pct3cnf)) {
        Variable third;
        do {
          third = coin(rng) ? private_variable(a, uniform(rng, p.n)) : private_variable(b, uniform(rng, p.n));
        } while (third == lits[0].variable() || third == lits[1].variable());
        lits.emplace_back(third, coin(rng));
      }
      Clause c(std::move(lits));
      if (!mapping.insert(c).second) continue;
      for (Literal l : c.literals()) used.insert(l.variable());
    }
    for (const Clause& c : mapping) {
      theories[a].add_clause(c);
      theories[b].add_clause(c);
    }
    for (Variable v : used) {
      theories[a].add_variable(v);
      theories[b].add_variable(v);
      labels.push_back({v, a, b});
    }
    out.shared_per_edge.push_back(used.size());
  }

  // Owner wins: a foreign variable is a target where its owner says so.
  std::map<Variable, std::size_t> owner;
  for (std::size_t i = 0; i < p.np; ++i)
    for (std::size_t j = 0; j < p.n; ++j) owner.emplace(private_variable(i, j), i);
  std::vector<std::set<Variable>> targets = own_targets;
  for (std::size_t i = 0; i < p.np; ++i) {
    for (Variable v : theories[i].vocabulary()) {
      const std::size_t o = owner.at(v);
      if (o != i && own_targets[o].contains(v) && targets[i].insert(v).second) ++out.target_adjustments;
    }
  }
  for (std::size_t i = 0; i < p.np; ++i) out.graph.add_peer(peer_name(i), std::move(theories[i]), std::move(targets[i]));
  for (const Label& l : labels) out.graph.add_edge(l.v, peer_name(l.a), peer_name(l.b));
  return out;
}

double QueryMetrics::mean_width() const {
  if (width_samples.empty()) return 0;
  return static_cast<double>(std::accumulate(width_samples.begin(), width_samples.end(), std::size_t{0})) /
         static_cast<double>(width_samples.size());
}

CdfTable cdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  CdfTable out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

CampaignResult run_campaign(const AcquaintanceGraph& g, const CampaignConfig& cfg) {
  CampaignResult out;
  const std::vector<PeerId> peers = g.peers();
  if (peers.empty()) return out;
  Rng rng = stream(cfg.seed, 4);
  const DecaNetwork net(g, cfg.limits);

  std::vector<double> depths, widths;
  std::size_t forths = 0, solicited = 0;
  for (std::size_t i = 0; i < cfg.queries; ++i) {
    QueryRecord rec;
    rec.query_id = i;
    rec.peer = peers[uniform(rng, peers.size())];
    const auto& vocab = g.peer(rec.peer).theory.vocabulary();
    if (vocab.empty()) throw InputError("peer " + rec.peer.name() + " has an empty vocabulary");
    rec.literal = Literal(*std::next(vocab.begin(), static_cast<std::ptrdiff_t>(uniform(rng, vocab.size()))), coin(rng));
    ScheduleConfig sc = cfg.schedule;
    sc.seed = rng();
    try {
      const QueryOutcome o = net.ask(rec.peer, rec.literal, sc);
      rec.metrics.depth = o.depth;
      rec.metrics.width_samples = o.width_samples;
      rec.metrics.integration_degree = o.integration_degree;
      rec.metrics.answers = o.answers.size();
      rec.metrics.aborted = o.report.aborted;
      rec.metrics.timed_out = o.report.timed_out || o.report.aborted;
      rec.metrics.terminated = o.terminated;
      rec.answer_times = o.answer_times;
      if (!o.answer_times.empty()) rec.first_answer = o.answer_times.front();
      rec.unsat = std::find(o.answers.begin(), o.answers.end(), Clause{}) != o.answers.end();
    } catch (const ResourceLimitError&) {
      // A peer ran out of its local budget: counted like a timeout.
      rec.metrics.timed_out = true;
    }
    depths.push_back(static_cast<double>(rec.metrics.depth));
    widths.push_back(rec.metrics.mean_width());
    forths += rec.metrics.width_samples.size();
    for (std::size_t w : rec.metrics.width_samples) solicited += w;
    out.records.push_back(std::move(rec));
  }

  out.depth_cdf = cdf(depths);
  out.width_cdf = cdf(widths);
  CampaignSummary& s = out.summary;
  s.queries = out.records.size();
  const double n = static_cast<double>(s.queries);
  for (const auto& r : out.records) {
    s.timeout_rate += r.metrics.timed_out / n;
    s.abort_rate += r.metrics.aborted / n;
    s.unsat_rate += r.unsat / n;
    s.mean_answers += static_cast<double>(r.metrics.answers) / n;
    s.max_depth = std::max(s.max_depth, r.metrics.depth);
  }
  s.mean_width_per_forth = forths ? static_cast<double>(solicited) / static_cast<double>(forths) : 0;
  s.mean_width_per_query = std::accumulate(widths.begin(), widths.end(), 0.0) / n;
  for (std::size_t k : {1, 10, 100, 1000, 0}) {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& r : out.records) {
      if (r.answer_times.empty() || r.answer_times.size() < k) continue;
      sum += k ? r.answer_times[k - 1] : r.answer_times.back();
      ++count;
    }
    s.time_to_answer.emplace_back(k ? std::to_string(k) : "all",
                                  count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt);
  }
  return out;
}

void write_campaign_csv(std::ostream& out, const CampaignResult& r) {
  out << "query_id,peer,literal,depth,mean_width,integration_degree,answers,first_answer_ms,timed_out,unsat\n";
  for (const auto& q : r.records) {
    out << q.query_id << ',' << q.peer.name() << ',' << to_string(q.literal) << ',' << q.metrics.depth << ','
        << q.metrics.mean_width() << ',' << q.metrics.integration_degree << ',' << q.metrics.answers << ',';
    if (q.first_answer) out << *q.first_answer;
    out << ',' << int{q.metrics.timed_out} << ',' << int{q.unsat} << '\n';
  }
}

void write_cdf(std::ostream& out, const std::string& name, const CdfTable& t) {
  out << name << ",fraction\n";
  for (auto [v, f] : t) out << v << ',' << f << '\n';
}

void write_summary(std::ostream& out, const CampaignSummary& s) {
  out << "queries," << s.queries << '\n'
      << "timeout_rate," << s.timeout_rate << '\n'
      << "abort_rate," << s.abort_rate << '\n'
      << "unsat_rate," << s.unsat_rate << '\n'
      << "mean_answers," << s.mean_answers << '\n'
      << "max_depth," << s.max_depth << '\n'
      << "mean_width_per_forth," << s.mean_width_per_forth << '\n'
      << "mean_width_per_query," << s.mean_width_per_query << '\n';
  for (const auto& [k, t] : s.time_to_answer) {
    out << "mean_time_to_answer_" << k << ',';
    if (t) out << *t;
    out << '\n';
  }
}

ClauseSet random_2p_theory(std::size_t n, std::size_t m, double p_ratio, std::uint64_t seed) {
  if (n < 3 || !(p_ratio >= 0 && p_ratio <= 1)) throw InputError("need n >= 3 and p_ratio in [0,1]");
  Rng rng = stream(seed, 5);
  const auto threes = static_cast<std::size_t>(std::lround(p_ratio * static_cast<double>(m)));
  ClauseSet out;
  auto draw = [&](std::size_t len) {
    for (;;) {
      std::set<std::size_t> vars;
      while (vars.size() < len) vars.insert(uniform(rng, n));
      std::vector<Literal> lits;
      for (std::size_t v : vars) lits.emplace_back(Variable::named("h" + std::to_string(v)), coin(rng));
      if (out.insert(Clause(std::move(lits))).second) return;
    }
  };
  for (std::size_t i = 0; i < m; ++i) draw(i < threes ? 3 : 2);
  return out;
}

HardnessStudy local_hardness_study(std::size_t n, std::size_t m, double p_ratio,
                                   const std::vector<std::uint64_t>& seeds, const ResourceLimits& limits) {
  HardnessStudy study;
  std::vector<double> prime_sizes, proper_sizes;
  auto bump = [](std::vector<std::size_t>& hist, std::size_t len) {
    if (hist.size() <= len) hist.resize(len + 1);
    ++hist[len];
  };
  for (std::uint64_t seed : seeds) {
    HardnessSample s;
    s.seed = seed;
    const ClauseSet theory = random_2p_theory(n, m, p_ratio, seed);
    Rng rng = stream(seed, 6);
    const Literal q(Variable::named("h" + std::to_string(uniform(rng, n))), coin(rng));
    try {
      const ClauseSet primes = prime_implicates(theory, limits);
      const ClauseSet proper = proper_prime_implicates_from(Clause::unit(q), primes, limits);
      for (const Clause& c : primes) bump(s.prime_by_length, c.size());
      for (const Clause& c : proper) bump(s.proper_by_length, c.size());
      s.prime_literals = total_literals(primes);
      s.proper_literals = total_literals(proper);
      prime_sizes.push_back(static_cast<double>(s.prime_literals));
      proper_sizes.push_back(static_cast<double>(s.proper_literals));
    } catch (const ResourceLimitError&) {
      s.capped = true;
      ++study.capped;
    }
    study.samples.push_back(std::move(s));
  }

  auto mean_hist = [&](auto member) {
    std::vector<double> out;
    const double done = static_cast<double>(study.samples.size() - study.capped);
    for (const auto& s : study.samples) {
      const auto& h = s.*member;
      if (out.size() < h.size()) out.resize(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) out[i] += static_cast<double>(h[i]) / done;
    }
    return out;
  };
  if (!prime_sizes.empty()) {
    study.mean_prime_by_length = mean_hist(&HardnessSample::prime_by_length);
    study.mean_proper_by_length = mean_hist(&HardnessSample::proper_by_length);
    study.median_prime_literals = median(prime_sizes);
    study.median_proper_literals = median(proper_sizes);
  }
  study.prime_size_cdf = cdf(prime_sizes);
  study.proper_size_cdf = cdf(proper_sizes);
  return study;
}

}  // namespace p2pcf
