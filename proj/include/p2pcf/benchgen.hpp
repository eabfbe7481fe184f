#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "p2pcf/graph.hpp"
#include "p2pcf/logic.hpp"
#include "p2pcf/transport.hpp"

namespace p2pcf {

struct GenParams {
  std::size_t np = 10;   // peers
  std::size_t k = 2;     // ring degree, even and < np
  double pr = 0.1;       // rewiring probability
  std::size_t n = 10;    // private variables per peer
  std::size_t m = 10;    // local 2-clauses per peer
  std::size_t t = 5;     // target variables per peer
  std::size_t q = 2;     // mapping clauses per edge
  double pct3cnf = 0.0;  // probability that a mapping clause gets a third literal
  std::uint64_t seed = 0;
};

// Throws InputError unless the invariants of GenParams hold (including
// m <= number of distinct 2-clauses over n variables).
void validate(const GenParams& p);

using TopologyEdge = std::pair<std::size_t, std::size_t>;  // first < second

// Watts-Strogatz style ring rewiring. The result has exactly np*k/2 edges,
// none of them self-loops or duplicates.
std::vector<TopologyEdge> gen_topology(std::size_t np, std::size_t k, double pr, std::uint64_t seed);

// Erdos-Renyi G(np, edges) with the same edge count, for comparisons.
std::vector<TopologyEdge> gen_uniform_topology(std::size_t np, std::size_t edges, std::uint64_t seed);

// Mean local clustering coefficient; nodes of degree < 2 count as 0.
double clustering_coefficient(std::size_t np, const std::vector<TopologyEdge>& edges);

struct GeneratedInstance {
  AcquaintanceGraph graph;
  std::vector<TopologyEdge> topology;
  // Distinct variables used by each topology edge's mapping clauses.
  std::vector<std::size_t> shared_per_edge;
  // Mapping variables whose target status was taken from the owning peer.
  std::size_t target_adjustments = 0;
};

// Peers are named p0..p{np-1}; peer i owns variables x{i}_0..x{i}_{n-1}.
// Every mapping clause is added to both endpoint theories.
GeneratedInstance gen_instance(const GenParams& p);

struct QueryMetrics {
  std::size_t depth = 0;
  std::vector<std::size_t> width_samples;
  std::size_t integration_degree = 0;
  std::size_t answers = 0;
  bool timed_out = false;
  // The run hit the campaign's delivery cap; also reported as timed_out in
  // the CSV.
  bool aborted = false;
  bool terminated = false;  // the User received the final notification

  double mean_width() const;
};

struct QueryRecord {
  std::size_t query_id = 0;
  PeerId peer;
  Literal literal;
  QueryMetrics metrics;
  std::optional<double> first_answer;  // model time
  std::vector<double> answer_times;
  bool unsat = false;                  // [] was among the answers
};

struct CampaignConfig {
  std::size_t queries = 100;
  std::uint64_t seed = 0;
  ScheduleConfig schedule;  // its seed is replaced per query
  ResourceLimits limits;
};

// (value, fraction of samples <= value), one row per distinct value.
using CdfTable = std::vector<std::pair<double, double>>;
CdfTable cdf(std::vector<double> samples);

struct CampaignSummary {
  std::size_t queries = 0;
  double timeout_rate = 0;
  double abort_rate = 0;
  double unsat_rate = 0;
  double mean_answers = 0;
  std::size_t max_depth = 0;
  double mean_width_per_forth = 0;
  double mean_width_per_query = 0;
  // Mean model time to the k-th answer (k = 1, 10, 100, 1000, all), over the
  // queries that produced at least that many answers.
  std::vector<std::pair<std::string, std::optional<double>>> time_to_answer;
};

struct CampaignResult {
  std::vector<QueryRecord> records;
  CdfTable depth_cdf;
  CdfTable width_cdf;  // per-query mean width
  CampaignSummary summary;
};

// Uniformly random (peer, literal over the peer's vocabulary) queries, each
// run with DECA in its own fabric.
CampaignResult run_campaign(const AcquaintanceGraph& g, const CampaignConfig& cfg);

// query_id,peer,literal,depth,mean_width,integration_degree,answers,
// first_answer_ms,timed_out,unsat
void write_campaign_csv(std::ostream& out, const CampaignResult& r);
void write_cdf(std::ostream& out, const std::string& name, const CdfTable& t);
void write_summary(std::ostream& out, const CampaignSummary& s);

struct HardnessSample {
  std::uint64_t seed = 0;
  bool capped = false;  // resource limit hit; the counts below are empty
  std::vector<std::size_t> prime_by_length;   // index = clause length
  std::vector<std::size_t> proper_by_length;
  std::size_t prime_literals = 0;
  std::size_t proper_literals = 0;
};

struct HardnessStudy {
  std::vector<HardnessSample> samples;
  std::vector<double> mean_prime_by_length;
  std::vector<double> mean_proper_by_length;
  CdfTable prime_size_cdf;
  CdfTable proper_size_cdf;
  std::optional<double> median_prime_literals;
  std::optional<double> median_proper_literals;
  std::size_t capped = 0;
};

// Uniform 2+p theories: m clauses over n variables, a fraction p_ratio of
// them of length 3 and the rest of length 2, distinct variables within a
// clause and no duplicate clauses. Proper prime implicates are those of a
// uniformly drawn literal.
ClauseSet random_2p_theory(std::size_t n, std::size_t m, double p_ratio, std::uint64_t seed);
HardnessStudy local_hardness_study(std::size_t n, std::size_t m, double p_ratio,
                                   const std::vector<std::uint64_t>& seeds,
                                   const ResourceLimits& limits = {});

}  // namespace p2pcf
