#include "packann/reference.hpp"

#include <algorithm>
#include <stdexcept>

#include "packann/quantization.hpp"

namespace packann::reference {

VertexId compute_medoid_serial(const VectorDataset& data) {
  const std::size_t n = data.count();
  if (n < 1) throw std::invalid_argument("compute_medoid_serial: empty dataset");
  double best_sum = 0.0;
  VertexId best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = data.vec(static_cast<VertexId>(i));
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += exact_distance(xi, data.vec(static_cast<VertexId>(j)));
    }
    if (i == 0 || sum < best_sum) {
      best_sum = sum;
      best = static_cast<VertexId>(i);
    }
  }
  return best;
}

std::vector<std::vector<VertexId>> ground_truth_serial(const VectorDataset& data,
                                                       const VectorDataset& queries,
                                                       std::uint32_t k) {
  if (data.dim() != queries.dim()) {
    throw std::invalid_argument("ground_truth_serial: dimension mismatch");
  }
  if (k < 1 || k > data.count()) {
    throw std::invalid_argument("ground_truth_serial: k out of range");
  }
  std::vector<std::vector<VertexId>> truth(queries.count());
  std::vector<std::pair<float, VertexId>> all(data.count());
  for (std::size_t qi = 0; qi < queries.count(); ++qi) {
    const auto q = queries.vec(static_cast<VertexId>(qi));
    for (std::size_t i = 0; i < data.count(); ++i) {
      all[i] = {exact_distance_sq(q, data.vec(static_cast<VertexId>(i))),
                static_cast<VertexId>(i)};
    }
    std::sort(all.begin(), all.end());
    auto& row = truth[qi];
    row.reserve(k);
    for (std::uint32_t j = 0; j < k; ++j) row.push_back(all[j].second);
  }
  return truth;
}

PageCompactnessReport layout_report_serial(const GraphIndex& graph, const Layout& layout) {
  PageCompactnessReport report;
  report.per_page.resize(layout.pages.size());
  for (std::size_t p = 0; p < layout.pages.size(); ++p) {
    const auto& page = layout.pages[p];
    PageReport& row = report.per_page[p];
    row.page_index = static_cast<std::uint32_t>(p);
    row.valid_count = page.valid_count;
    if (page.valid_count < 2) continue;
    const std::span<const VertexId> ids{page.slots.data(), page.valid_count};
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

}  // namespace packann::reference
