#include "packann/bundle.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace packann {

VectorDataset IndexBundle::load_vectors() const {
  FileBackend backend(dir / "pages.bin");
  const auto blocks = read_all_blocks(backend);
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(params.count) * params.dim);
  for (const auto& block : blocks) {
    data.insert(data.end(), block.vector.begin(), block.vector.end());
  }
  return VectorDataset(params.dim, std::move(data));
}

void save_bundle_meta(const IndexBundle& bundle) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = "packann-bundle";
  j["count"] = bundle.params.count;
  j["dim"] = bundle.params.dim;
  j["r"] = bundle.params.max_degree;
  j["b"] = bundle.params.blocks_per_page;
  j["page_size"] = bundle.params.page_size;
  j["layout"] = bundle.layout_kind;
  j["medoid"] = bundle.medoid;
  j["build_width"] = bundle.build_width;
  std::ofstream out(bundle.dir / "meta.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write meta.json in " + bundle.dir.string());
  out << j.dump(2) << "\n";
}

IndexBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw std::runtime_error("no meta.json in " + dir.string());
  nlohmann::json j;
  meta_in >> j;
  if (j.value("kind", "") != "packann-bundle" || j.value("schema", 0) != 1) {
    throw std::runtime_error("not a bundle directory: " + dir.string());
  }

  IndexBundle bundle;
  bundle.dir = dir;
  bundle.layout_kind = j.at("layout").get<std::string>();
  bundle.medoid = j.at("medoid").get<VertexId>();
  bundle.build_width = j.value("build_width", 0u);
  bundle.params = read_index_header(dir / "pages.bin");
  if (bundle.params.count != j.at("count").get<std::uint32_t>() ||
      bundle.params.dim != j.at("dim").get<std::uint32_t>()) {
    throw std::runtime_error("meta.json disagrees with pages.bin in " + dir.string());
  }
  bundle.codebook = PQCodebook::load((dir / "codebook.bin").string());
  bundle.codes = PQCodes::load((dir / "codes.bin").string());
  bundle.graph = GraphIndex::load((dir / "graph.bin").string());
  bundle.forward = IdMapping::load_forward((dir / "mapping.bin").string());
  bundle.inverse.assign(bundle.forward.size(), kPadId);
  for (std::size_t i = 0; i < bundle.forward.size(); ++i) {
    bundle.inverse[bundle.forward[i]] = static_cast<VertexId>(i);
  }
  if (std::filesystem::exists(dir / "entries.bin")) {
    bundle.entries = EntryCandidates::load((dir / "entries.bin").string());
  }
  return bundle;
}

}  // namespace packann
