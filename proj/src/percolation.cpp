#include "trunclab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "trunclab/errors.hpp"
#include "trunclab/philox.hpp"

namespace trunclab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool edge_open(const WindowEdge& e, std::uint64_t seed, std::uint64_t trial) {
  if (e.p <= 0.0) return false;
  if (e.p >= 1.0) return true;
  return uniform(seed, trial, e.key) < e.p;
}

void require_terminals(const GraphWindow& w, const Event& e) {
  switch (e.kind) {
    case Event::Kind::Crossing:
      if (w.left.empty() || w.right.empty()) {
        throw DomainError("window has no crossing terminals");
      }
      break;
    case Event::Kind::OriginBoundary:
      if (!w.origin) throw DomainError("origin outside window");
      break;
    case Event::Kind::Connects:
      if (e.u >= w.vertex_count() || e.v >= w.vertex_count()) {
        throw DomainError("event vertex outside window");
      }
      break;
  }
}

/// Per-worker scratch for event evaluation.
class EventChecker {
 public:
  EventChecker(const GraphWindow& w, const Event& e) : w_(w), e_(e) {
    require_terminals(w, e);
    if (e.kind == Event::Kind::OriginBoundary) {
      for (VertexId v = 0; v < w.vertex_count(); ++v) {
        if (w.boundary[v]) boundary_.push_back(v);
      }
    }
    if (e.kind == Event::Kind::Crossing) stamp_.assign(w.vertex_count(), 0);
  }

  bool operator()(UnionFind& uf) {
    switch (e_.kind) {
      case Event::Kind::Crossing: {
        if (++epoch_ == 0) {
          std::fill(stamp_.begin(), stamp_.end(), 0);
          epoch_ = 1;
        }
        for (VertexId r : w_.right) stamp_[uf.find(r)] = epoch_;
        for (VertexId l : w_.left) {
          if (stamp_[uf.find(l)] == epoch_) return true;
        }
        return false;
      }
      case Event::Kind::OriginBoundary: {
        const VertexId root = uf.find(*w_.origin);
        for (VertexId b : boundary_) {
          if (uf.find(b) == root) return true;
        }
        return false;
      }
      case Event::Kind::Connects:
        return uf.connected(e_.u, e_.v);
    }
    return false;
  }

 private:
  const GraphWindow& w_;
  Event e_;
  std::vector<VertexId> boundary_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

std::uint64_t count_block(const GraphWindow& w, const Event& e, std::uint64_t seed,
                          std::uint64_t first, std::uint64_t last) {
  EventChecker check(w, e);
  UnionFind uf;
  std::uint64_t hits = 0;
  for (std::uint64_t t = first; t < last; ++t) {
    uf.reset(w.vertex_count());
    for (const auto& edge : w.edges) {
      if (edge_open(edge, seed, t)) uf.unite(edge.u, edge.v);
    }
    hits += check(uf) ? 1 : 0;
  }
  return hits;
}

}  // namespace

std::string to_string(Event::Kind k) {
  switch (k) {
    case Event::Kind::Crossing: return "crossing";
    case Event::Kind::OriginBoundary: return "theta";
    case Event::Kind::Connects: return "connects";
  }
  return "unknown";
}

std::vector<std::uint8_t> sample_open_edges(const GraphWindow& w, std::uint64_t master_seed,
                                            std::uint64_t trial) {
  std::vector<std::uint8_t> open(w.edges.size());
  for (std::size_t i = 0; i < w.edges.size(); ++i) open[i] = edge_open(w.edges[i], master_seed, trial);
  return open;
}

ClusterState sample_and_cluster(const GraphWindow& w, std::uint64_t master_seed, std::uint64_t trial) {
  ClusterState state{UnionFind(w.vertex_count()), sample_open_edges(w, master_seed, trial)};
  for (std::size_t i = 0; i < w.edges.size(); ++i) {
    if (state.open[i]) state.forest.unite(w.edges[i].u, w.edges[i].v);
  }
  return state;
}

bool event_holds(const GraphWindow& w, UnionFind& forest, const Event& e) {
  EventChecker check(w, e);
  return check(forest);
}

double Estimate::standard_error() const {
  if (trials == 0) return 0.0;
  return std::sqrt(value * (1.0 - value) / static_cast<double>(trials));
}

Estimate make_estimate(std::uint64_t successes, std::uint64_t trials, std::uint64_t master_seed) {
  if (trials == 0) throw DomainError("an estimate needs at least one trial");
  Estimate est;
  est.successes = successes;
  est.trials = trials;
  est.value = static_cast<double>(successes) / static_cast<double>(trials);
  est.half_width = 1.96 * est.standard_error();
  est.master_seed = master_seed;
  est.seed_rule = kSeedRule;
  return est;
}

Estimate estimate_event(const GraphWindow& w, const Event& e, std::uint64_t trials,
                        std::uint64_t master_seed, unsigned threads) {
  if (trials == 0) throw DomainError("trials must be >= 1");
  require_terminals(w, e);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));

  std::vector<std::uint64_t> hits(threads, 0);
  if (threads == 1) {
    hits[0] = count_block(w, e, master_seed, 0, trials);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) {
      const std::uint64_t first = trials * i / threads;
      const std::uint64_t last = trials * (i + 1) / threads;
      pool.emplace_back([&, i, first, last] { hits[i] = count_block(w, e, master_seed, first, last); });
    }
  }
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return make_estimate(total, trials, master_seed);
}

Estimate origin_boundary_estimate(const GraphWindow& w, std::uint64_t trials,
                                  std::uint64_t master_seed, unsigned threads) {
  return estimate_event(w, Event::origin_boundary(), trials, master_seed, threads);
}

std::string describe(const Family& f) {
  return std::visit(overloaded{
                        [](const LatticeFamily& l) { return "Z^" + std::to_string(l.d); },
                        [](const SlabFamily& s) {
                          return "slab(d=" + std::to_string(s.d) + ",K=" + std::to_string(s.K) + ")";
                        },
                        [](const LongRangeFamily& r) {
                          std::string s = "long-range[" + r.seq.describe();
                          if (r.truncation) s += ", N=" + std::to_string(*r.truncation);
                          return s + "]";
                        },
                    },
                    f);
}

WindowSpec crossing_window_spec(const Family& f, double p, std::int64_t L) {
  if (L < 1) throw DomainError("L must be >= 1");
  return std::visit(overloaded{
                        [&](const LatticeFamily& l) -> WindowSpec {
                          if (l.d < 2) throw ConfigError("lattice crossing needs d >= 2");
                          LatticeSpec s;
                          s.extents.assign(static_cast<std::size_t>(l.d), Interval{0, L});
                          s.extents[0] = {0, L + 1};
                          s.p = p;
                          return s;
                        },
                        [&](const SlabFamily& s) -> WindowSpec {
                          return slab_spec(s.d, s.K, {0, L + 1}, {0, L}, p);
                        },
                        [&](const LongRangeFamily& r) -> WindowSpec {
                          return LongRangeSpec{r.seq, r.truncation, {0, L + 1}, {0, L}};
                        },
                    },
                    f);
}

WindowSpec theta_window_spec(const Family& f, double p, std::int64_t L) {
  if (L < 1) throw DomainError("L must be >= 1");
  return std::visit(overloaded{
                        [&](const LatticeFamily& l) -> WindowSpec {
                          if (l.d < 1) throw ConfigError("lattice needs d >= 1");
                          LatticeSpec s;
                          s.extents.assign(static_cast<std::size_t>(l.d), Interval{-L, L});
                          s.p = p;
                          return s;
                        },
                        [&](const SlabFamily& s) -> WindowSpec {
                          return slab_spec(s.d, s.K, {-L, L}, {-L, L}, p);
                        },
                        [&](const LongRangeFamily& r) -> WindowSpec {
                          return LongRangeSpec{r.seq, r.truncation, {-L, L}, {-L, L}};
                        },
                    },
                    f);
}

Estimate crossing_estimate(const Family& f, double p, std::int64_t L, std::uint64_t trials,
                           std::uint64_t master_seed, unsigned threads) {
  const GraphWindow w = build_window(crossing_window_spec(f, p, L));
  return estimate_event(w, Event::crossing(), trials, master_seed, threads);
}

double exact_event_probability(const GraphWindow& w, const Event& e) {
  require_terminals(w, e);
  const std::size_t m = w.edges.size();
  if (m > kMaxExactEdges) {
    throw DomainError("exact enumeration refused: " + std::to_string(m) + " edges exceeds the bound of " +
                      std::to_string(kMaxExactEdges));
  }
  const std::uint32_t n = w.vertex_count();
  std::vector<std::vector<std::pair<VertexId, std::size_t>>> adj(n);
  for (std::size_t i = 0; i < m; ++i) {
    adj[w.edges[i].u].push_back({w.edges[i].v, i});
    adj[w.edges[i].v].push_back({w.edges[i].u, i});
  }

  std::vector<VertexId> sources;
  std::vector<std::uint8_t> target(n, 0);
  switch (e.kind) {
    case Event::Kind::Crossing:
      sources = w.left;
      for (VertexId r : w.right) target[r] = 1;
      break;
    case Event::Kind::OriginBoundary:
      sources = {*w.origin};
      for (VertexId v = 0; v < n; ++v) target[v] = w.boundary[v];
      break;
    case Event::Kind::Connects:
      sources = {e.u};
      target[e.v] = 1;
      break;
  }

  std::vector<std::uint8_t> seen(n);
  std::vector<VertexId> queue;
  queue.reserve(n);
  auto reaches = [&](std::uint64_t mask) {
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();
    for (VertexId s : sources) {
      if (!seen[s]) {
        seen[s] = 1;
        queue.push_back(s);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const VertexId x = queue[head];
      if (target[x]) return true;
      for (auto [y, idx] : adj[x]) {
        if (((mask >> idx) & 1u) && !seen[y]) {
          seen[y] = 1;
          queue.push_back(y);
        }
      }
    }
    return false;
  };

  long double total = 0.0L;
  const std::uint64_t configs = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < configs; ++mask) {
    long double weight = 1.0L;
    for (std::size_t i = 0; i < m && weight != 0.0L; ++i) {
      const long double p = w.edges[i].p;
      weight *= ((mask >> i) & 1u) ? p : 1.0L - p;
    }
    if (weight != 0.0L && reaches(mask)) total += weight;
  }
  return static_cast<double>(total);
}

}  // namespace trunclab
