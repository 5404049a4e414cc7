#include "packann/compactness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace packann {

std::size_t SmallGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adj) twice += a.size();
  return twice / 2;
}

SmallGraph induced_subgraph(const GraphIndex& graph, std::span<const VertexId> ids) {
  SmallGraph g;
  g.n = static_cast<std::uint32_t>(ids.size());
  g.adj.resize(g.n);
  std::unordered_map<VertexId, std::uint32_t> local;
  local.reserve(ids.size());
  for (std::uint32_t i = 0; i < g.n; ++i) {
    if (ids[i] >= graph.size()) {
      throw std::invalid_argument("induced_subgraph: id outside the graph");
    }
    if (!local.emplace(ids[i], i).second) {
      throw std::invalid_argument("induced_subgraph: duplicate id");
    }
  }
  // Symmetrize: one directed edge in either direction yields {u, v}.
  std::vector<std::vector<std::uint8_t>> seen(g.n, std::vector<std::uint8_t>(g.n, 0));
  for (std::uint32_t i = 0; i < g.n; ++i) {
    for (VertexId w : graph.neighbors(ids[i])) {
      auto it = local.find(w);
      if (it == local.end() || it->second == i) continue;
      const std::uint32_t j = it->second;
      if (!seen[i][j]) {
        seen[i][j] = seen[j][i] = 1;
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
    }
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

int diameter(const SmallGraph& g) {
  if (g.n == 0) throw std::invalid_argument("diameter: empty graph");
  int longest = 0;
  std::vector<int> dist(g.n);
  for (std::uint32_t s = 0; s < g.n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<std::uint32_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::uint32_t v = q.front();
      q.pop();
      for (std::uint32_t u : g.adj[v]) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
    for (std::uint32_t v = 0; v < g.n; ++v) {
      if (dist[v] < 0) return kInfiniteDiameter;
      longest = std::max(longest, dist[v]);
    }
  }
  return longest;
}

std::vector<double> laplacian(const SmallGraph& g) {
  const std::size_t n = g.n;
  std::vector<double> lap(n * n, 0.0);
  for (std::uint32_t i = 0; i < g.n; ++i) {
    lap[i * n + i] = static_cast<double>(g.adj[i].size());
    for (std::uint32_t j : g.adj[i]) lap[i * n + j] = -1.0;
  }
  return lap;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> m, std::uint32_t n) {
  if (n == 0) return {};
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) s += 2.0 * m[i * n + j] * m[i * n + j];
    }
    return std::sqrt(s);
  };
  constexpr double kTol = 1e-10;
  constexpr int kMaxSweeps = 64;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > kTol; ++sweep) {
    for (std::uint32_t p = 0; p + 1 < n; ++p) {
      for (std::uint32_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (apq == 0.0) continue;
        const double app = m[p * n + p];
        const double aqq = m[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::uint32_t i = 0; i < n; ++i) {
          const double aip = m[i * n + p];
          const double aiq = m[i * n + q];
          m[i * n + p] = c * aip - s * aiq;
          m[i * n + q] = s * aip + c * aiq;
        }
        for (std::uint32_t i = 0; i < n; ++i) {
          const double api = m[p * n + i];
          const double aqi = m[q * n + i];
          m[p * n + i] = c * api - s * aqi;
          m[q * n + i] = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> evals(n);
  for (std::uint32_t i = 0; i < n; ++i) evals[i] = m[i * n + i];
  std::sort(evals.begin(), evals.end());
  return evals;
}

double algebraic_connectivity(const std::vector<double>& lap, std::uint32_t n) {
  if (n < 2) throw std::invalid_argument("algebraic_connectivity: need >= 2 vertices");
  if (lap.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("algebraic_connectivity: matrix size mismatch");
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (std::abs(lap[i * n + j] - lap[j * n + i]) > 1e-12) {
        throw std::invalid_argument("algebraic_connectivity: asymmetric input");
      }
    }
  }
  const auto evals = symmetric_eigenvalues(lap, n);
  double lambda2 = evals[1];
  if (lambda2 < 1e-9) lambda2 = 0.0;  // zero exactly when disconnected
  return lambda2;
}

double page_compactness(const GraphIndex& graph, std::span<const VertexId> valid_ids) {
  if (valid_ids.empty()) throw std::invalid_argument("page_compactness: empty page");
  if (valid_ids.size() == 1) return 0.0;  // a singleton has no internal locality
  const SmallGraph g = induced_subgraph(graph, valid_ids);
  const int d = diameter(g);
  if (d == kInfiniteDiameter) return 0.0;
  const double lambda2 = algebraic_connectivity(laplacian(g), g.n);
  return lambda2 / static_cast<double>(d);
}

PageCompactnessReport layout_report(const GraphIndex& graph, const Layout& layout,
                                    int threads) {
  PageCompactnessReport report;
  const std::int64_t n_pages = static_cast<std::int64_t>(layout.pages.size());
  report.per_page.resize(layout.pages.size());

#pragma omp parallel for schedule(dynamic, 8) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::int64_t p = 0; p < n_pages; ++p) {
    const auto& page = layout.pages[static_cast<std::size_t>(p)];
    PageReport& row = report.per_page[static_cast<std::size_t>(p)];
    row.page_index = static_cast<std::uint32_t>(p);
    row.valid_count = page.valid_count;
    const std::span<const VertexId> ids{page.slots.data(), page.valid_count};
    if (page.valid_count < 2) {
      row.diameter = 0;
      row.lambda2 = 0.0;
      row.gamma = 0.0;
      continue;
    }
    const SmallGraph g = induced_subgraph(graph, ids);
    row.diameter = diameter(g);
    if (row.diameter == kInfiniteDiameter) {
      row.lambda2 = 0.0;
      row.gamma = 0.0;
    } else {
      row.lambda2 = algebraic_connectivity(laplacian(g), g.n);
      row.gamma = row.lambda2 / static_cast<double>(row.diameter);
    }
  }

  std::size_t multi = 0, disconnected = 0, connected = 0, above_half = 0;
  double gamma_sum = 0.0, gamma_sum_connected = 0.0;
  for (const auto& row : report.per_page) {
    if (row.valid_count < 2) continue;
    ++multi;
    gamma_sum += row.gamma;
    if (row.diameter == kInfiniteDiameter) {
      ++disconnected;
    } else {
      ++connected;
      gamma_sum_connected += row.gamma;
      if (row.gamma > 0.5) ++above_half;
    }
  }
  report.mean_gamma = multi ? gamma_sum / static_cast<double>(multi) : 0.0;
  report.mean_gamma_connected =
      connected ? gamma_sum_connected / static_cast<double>(connected) : 0.0;
  report.fraction_disconnected =
      multi ? static_cast<double>(disconnected) / static_cast<double>(multi) : 0.0;
  report.fraction_gamma_above_half =
      connected ? static_cast<double>(above_half) / static_cast<double>(connected) : 0.0;
  return report;
}

std::string report_csv(const PageCompactnessReport& report) {
  std::ostringstream out;
  out << "page_index,valid_count,diameter,lambda2,gamma\n";
  char buf[64];
  for (const auto& row : report.per_page) {
    out << row.page_index << ',' << row.valid_count << ',';
    if (row.diameter == kInfiniteDiameter) {
      out << "inf";
    } else {
      out << row.diameter;
    }
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g\n", row.lambda2, row.gamma);
    out << buf;
  }
  return out.str();
}

std::string report_summary_json(const PageCompactnessReport& report) {
  nlohmann::json j;
  j["schema"] = 1;
  j["pages"] = report.per_page.size();
  j["mean_gamma"] = report.mean_gamma;
  j["mean_gamma_connected"] = report.mean_gamma_connected;
  j["fraction_disconnected"] = report.fraction_disconnected;
  j["fraction_gamma_above_half"] = report.fraction_gamma_above_half;
  return j.dump(2);
}

}  // namespace packann
