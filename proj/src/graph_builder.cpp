#include "packann/graph_builder.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

#include "packann/quantization.hpp"

namespace packann {

void BuildParams::check_valid() const {
  if (max_degree < 1) throw std::invalid_argument("BuildParams: R must be >= 1");
  if (build_width < max_degree) {
    throw std::invalid_argument("BuildParams: build width must be >= R");
  }
  if (alpha1 < 1.0f || alpha2 < alpha1) {
    throw std::invalid_argument("BuildParams: need alpha2 >= alpha1 >= 1");
  }
}

VertexId compute_medoid(const VectorDataset& data, int threads) {
  const std::int64_t n = static_cast<std::int64_t>(data.count());
  if (n < 1) throw std::invalid_argument("compute_medoid: empty dataset");
  std::vector<double> totals(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    const auto xi = data.vec(static_cast<VertexId>(i));
    double sum = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      sum += exact_distance(xi, data.vec(static_cast<VertexId>(j)));
    }
    totals[static_cast<std::size_t>(i)] = sum;
  }
  VertexId best = 0;
  for (std::int64_t i = 1; i < n; ++i) {
    if (totals[static_cast<std::size_t>(i)] < totals[best]) {
      best = static_cast<VertexId>(i);
    }
  }
  return best;
}

GreedySearchResult greedy_build_search(const GraphIndex& graph, const VectorDataset& data,
                                       VertexId start, std::span<const float> query,
                                       std::uint32_t width) {
  if (graph.size() == 0) throw std::invalid_argument("greedy_build_search: empty graph");
  if (width < 1) throw std::invalid_argument("greedy_build_search: width must be >= 1");

  struct Entry {
    float dist;
    VertexId id;
    bool expanded;
  };
  std::vector<Entry> list;  // ascending by (dist, id), length <= width
  list.reserve(width + 1);
  std::vector<std::uint8_t> in_list(graph.size(), 0);

  auto insert = [&](VertexId id, float dist) {
    if (in_list[id]) return;
    const Entry e{dist, id, false};
    auto pos = std::lower_bound(list.begin(), list.end(), e, [](const Entry& a, const Entry& b) {
      return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
    });
    if (list.size() >= width && pos == list.end()) return;
    list.insert(pos, e);
    in_list[id] = 1;
    if (list.size() > width) {
      in_list[list.back().id] = 0;
      list.pop_back();
    }
  };

  GreedySearchResult result;
  insert(start, exact_distance(query, data.vec(start)));
  while (true) {
    auto next = std::find_if(list.begin(), list.end(), [](const Entry& e) { return !e.expanded; });
    if (next == list.end()) break;
    next->expanded = true;
    const VertexId v = next->id;
    result.visited.push_back(v);
    for (VertexId u : graph.neighbors(v)) {
      insert(u, exact_distance(query, data.vec(u)));
    }
  }
  result.candidates.reserve(list.size());
  for (const Entry& e : list) result.candidates.emplace_back(e.dist, e.id);
  return result;
}

std::vector<VertexId> robust_prune(std::vector<std::pair<float, VertexId>> candidates,
                                   VertexId v, const VectorDataset& data, float alpha,
                                   std::uint32_t max_degree) {
  std::sort(candidates.begin(), candidates.end());
  std::vector<VertexId> kept;
  std::vector<std::uint8_t> alive(candidates.size(), 1);
  for (std::size_t i = 0; i < candidates.size() && kept.size() < max_degree; ++i) {
    if (!alive[i]) continue;
    const VertexId p = candidates[i].second;
    if (p == v) continue;
    kept.push_back(p);
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (!alive[j]) continue;
      const VertexId q = candidates[j].second;
      if (alpha * exact_distance(data.vec(p), data.vec(q)) <= candidates[j].first) {
        alive[j] = 0;
      }
    }
  }
  return kept;
}

std::vector<VertexId> unreachable_from(const GraphIndex& graph, VertexId start) {
  std::vector<std::uint8_t> seen(graph.size(), 0);
  std::queue<VertexId> frontier;
  seen[start] = 1;
  frontier.push(start);
  while (!frontier.empty()) {
    const VertexId v = frontier.front();
    frontier.pop();
    for (VertexId u : graph.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        frontier.push(u);
      }
    }
  }
  std::vector<VertexId> missing;
  for (std::size_t v = 0; v < graph.size(); ++v) {
    if (!seen[v]) missing.push_back(static_cast<VertexId>(v));
  }
  return missing;
}

namespace {

// Insert edge u -> v, pruning u's list when it would exceed R.
void add_reverse_edge(GraphIndex& graph, const VectorDataset& data, VertexId u, VertexId v,
                      float alpha, std::uint32_t max_degree) {
  auto& nbrs = graph.out_neighbors[u];
  if (std::find(nbrs.begin(), nbrs.end(), v) != nbrs.end()) return;
  if (nbrs.size() < max_degree) {
    nbrs.push_back(v);
    return;
  }
  std::vector<std::pair<float, VertexId>> cand;
  cand.reserve(nbrs.size() + 1);
  for (VertexId w : nbrs) cand.emplace_back(exact_distance(data.vec(u), data.vec(w)), w);
  cand.emplace_back(exact_distance(data.vec(u), data.vec(v)), v);
  nbrs = robust_prune(std::move(cand), u, data, alpha, max_degree);
}

void insert_pass(GraphIndex& graph, const VectorDataset& data, const BuildParams& params,
                 VertexId medoid, float alpha, std::mt19937_64& rng) {
  std::vector<VertexId> order(data.count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (VertexId v : order) {
    const auto search =
        greedy_build_search(graph, data, medoid, data.vec(v), params.build_width);
    std::vector<std::pair<float, VertexId>> cand;
    cand.reserve(search.visited.size());
    for (VertexId u : search.visited) {
      if (u == v) continue;
      cand.emplace_back(exact_distance(data.vec(v), data.vec(u)), u);
    }
    graph.out_neighbors[v] =
        robust_prune(std::move(cand), v, data, alpha, params.max_degree);
    for (VertexId u : graph.out_neighbors[v]) {
      add_reverse_edge(graph, data, u, v, alpha, params.max_degree);
    }
  }
}

}  // namespace

GraphIndex build_vamana(const VectorDataset& data, const BuildParams& params,
                        std::uint64_t seed) {
  params.check_valid();
  const std::size_t n = data.count();
  if (n < 2) throw std::invalid_argument("build_vamana: need at least 2 points");

  std::mt19937_64 rng(seed);
  GraphIndex graph;
  graph.max_degree = params.max_degree;
  graph.out_neighbors.resize(n);

  // Random initial graph: R distinct out-neighbors per vertex (fewer when
  // the dataset is smaller than R + 1).
  const std::uint32_t init_degree =
      static_cast<std::uint32_t>(std::min<std::size_t>(params.max_degree, n - 1));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    auto& nbrs = graph.out_neighbors[v];
    while (nbrs.size() < init_degree) {
      const VertexId u = static_cast<VertexId>(pick(rng));
      if (u == v) continue;
      if (std::find(nbrs.begin(), nbrs.end(), u) == nbrs.end()) nbrs.push_back(u);
    }
  }

  const VertexId medoid = compute_medoid(data);
  insert_pass(graph, data, params, medoid, params.alpha1, rng);
  insert_pass(graph, data, params, medoid, params.alpha2, rng);

  // Search correctness needs every vertex reachable from the medoid. Link
  // stragglers from their nearest reachable vertex, keeping the new edge even
  // when that vertex's list is full.
  for (std::size_t round = 0; round < n; ++round) {
    const auto missing = unreachable_from(graph, medoid);
    if (missing.empty()) break;
    std::vector<std::uint8_t> is_missing(n, 0);
    for (VertexId u : missing) is_missing[u] = 1;
    for (VertexId u : missing) {
      float best = std::numeric_limits<float>::max();
      VertexId w = medoid;
      for (std::size_t x = 0; x < n; ++x) {
        if (is_missing[x] || x == u) continue;
        const float d = exact_distance(data.vec(u), data.vec(static_cast<VertexId>(x)));
        if (d < best || (d == best && static_cast<VertexId>(x) < w)) {
          best = d;
          w = static_cast<VertexId>(x);
        }
      }
      auto& nbrs = graph.out_neighbors[w];
      if (std::find(nbrs.begin(), nbrs.end(), u) != nbrs.end()) continue;
      if (nbrs.size() >= params.max_degree) {
        // Drop the farthest existing neighbor so u always fits.
        std::size_t drop = 0;
        float worst = -1.0f;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
          const float d = exact_distance(data.vec(w), data.vec(nbrs[i]));
          if (d > worst) {
            worst = d;
            drop = i;
          }
        }
        nbrs.erase(nbrs.begin() + static_cast<std::ptrdiff_t>(drop));
      }
      nbrs.push_back(u);
    }
  }

  graph.check_valid();
  return graph;
}

}  // namespace packann
