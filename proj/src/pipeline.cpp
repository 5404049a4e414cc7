#include "packann/pipeline.hpp"

#include <stdexcept>

namespace packann {

std::uint32_t default_pq_chunks(std::uint32_t dim) {
  std::uint32_t m = std::max<std::uint32_t>(1, dim / 4);
  while (dim % m != 0) --m;
  return m;
}

IndexBundle build_bundle(const VectorDataset& data, const std::filesystem::path& dir,
                         const BuildConfig& config) {
  data.check_valid();
  std::filesystem::create_directories(dir);

  IndexBundle bundle;
  bundle.dir = dir;
  bundle.layout_kind = "roundrobin";
  bundle.build_width = config.build.build_width;
  bundle.graph = build_vamana(data, config.build, config.seed);
  bundle.medoid = compute_medoid(data);

  const std::uint32_t chunks =
      config.pq_chunks ? config.pq_chunks : default_pq_chunks(static_cast<std::uint32_t>(data.dim()));
  bundle.codebook = train_pq(data, chunks, config.pq_iters, config.seed + 1);
  bundle.codes = encode_all(bundle.codebook, data);

  bundle.params.count = static_cast<std::uint32_t>(data.count());
  bundle.params.dim = static_cast<std::uint32_t>(data.dim());
  bundle.params.max_degree = config.build.max_degree;
  bundle.params.page_size = config.page_size;
  bundle.params.blocks_per_page =
      blocks_per_page(bundle.params.dim, bundle.params.max_degree, config.page_size);

  std::vector<DataBlock> blocks(data.count());
  for (std::size_t i = 0; i < data.count(); ++i) {
    blocks[i].id = static_cast<VertexId>(i);
    const auto v = data.vec(static_cast<VertexId>(i));
    blocks[i].vector.assign(v.begin(), v.end());
    blocks[i].neighbors = bundle.graph.out_neighbors[i];
  }
  write_index(blocks, bundle.params, dir / "pages.bin");
  bundle.graph.save((dir / "graph.bin").string());
  bundle.codebook.save((dir / "codebook.bin").string());
  bundle.codes.save((dir / "codes.bin").string());

  const IdMapping identity = identity_mapping(data.count());
  bundle.forward = identity.forward;
  bundle.inverse = identity.inverse;
  identity.save_forward((dir / "mapping.bin").string());
  save_bundle_meta(bundle);
  return bundle;
}

IndexBundle map_bundle(const IndexBundle& input, const std::filesystem::path& dir,
                       PackOrder order) {
  std::filesystem::create_directories(dir);
  const VectorDataset vectors = input.load_vectors();
  const std::uint32_t b = input.params.blocks_per_page;

  const PackResult packed = pack(input.graph, vectors, input.codebook, input.codes, b, order);
  const MergeResult merged = merge(packed.layout, b);
  const IdMapping mapping = compose_mapping(packed.f_inj, merged.f_surj);

  IndexBundle out;
  out.dir = dir;
  out.layout_kind = "mapped";
  out.build_width = input.build_width;
  out.params = input.params;
  out.medoid = mapping.forward[input.medoid];
  out.graph = remap_graph(input.graph, mapping);
  out.codebook = input.codebook;

  out.codes.num_chunks = input.codes.num_chunks;
  out.codes.codes.resize(input.codes.codes.size());
  for (std::size_t v = 0; v < input.params.count; ++v) {
    const auto src = input.codes.code(static_cast<VertexId>(v));
    std::copy(src.begin(), src.end(),
              out.codes.codes.begin() +
                  static_cast<std::size_t>(mapping.forward[v]) * out.codes.num_chunks);
  }

  // Mapping on disk always translates from original-dataset ids.
  out.forward.resize(input.forward.size());
  out.inverse.assign(input.forward.size(), kPadId);
  for (std::size_t orig = 0; orig < input.forward.size(); ++orig) {
    out.forward[orig] = mapping.forward[input.forward[orig]];
    out.inverse[out.forward[orig]] = static_cast<VertexId>(orig);
  }

  const auto blocks = remap_blocks(input.graph, vectors, mapping, merged.layout);
  write_index(blocks, out.params, dir / "pages.bin");
  out.graph.save((dir / "graph.bin").string());
  out.codebook.save((dir / "codebook.bin").string());
  out.codes.save((dir / "codes.bin").string());

  IdMapping total;
  total.forward = out.forward;
  total.save_forward((dir / "mapping.bin").string());

  if (input.entries) {
    EntryCandidates entries = *input.entries;
    for (VertexId& id : entries.ids) id = mapping.forward[id];
    entries.medoid = out.medoid;
    entries.save((dir / "entries.bin").string());
    out.entries = std::move(entries);
  }
  save_bundle_meta(out);
  return out;
}

void add_entries(IndexBundle& bundle, std::uint32_t n_cluster, std::uint32_t batch_size,
                 std::uint32_t iters, std::uint64_t seed, std::uint32_t search_width) {
  const VectorDataset vectors = bundle.load_vectors();
  if (search_width == 0) search_width = bundle.build_width ? bundle.build_width : 128;
  const auto centroids =
      minibatch_kmeans(vectors, n_cluster, batch_size, iters, seed);
  EntryCandidates entries = gen_entry_candidates(bundle.graph, vectors, centroids, n_cluster,
                                                 bundle.medoid, search_width);
  entries.save((bundle.dir / "entries.bin").string());
  bundle.entries = std::move(entries);
}

}  // namespace packann
