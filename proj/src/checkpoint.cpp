#include "dynmis/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace dynmis {

using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'Y', 'N', 'M', 'I', 'S', 'C', 'K'};

void put_u64(std::ostream& out, std::uint64_t x) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t x) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::CheckpointCorrupt, "truncated checkpoint");
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | bytes[i];
  return x;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw Error(ErrorCode::CheckpointCorrupt, "truncated checkpoint");
  std::uint32_t x = 0;
  for (int i = 3; i >= 0; --i) x = (x << 8) | bytes[i];
  return x;
}

void put_tensor(std::ostream& out, const neural::Tensor& t) {
  for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void get_tensor(std::istream& in, neural::Tensor& t) {
  for (double& v : t.values()) v = std::bit_cast<double>(get_u64(in));
}

std::vector<std::uint64_t> dimension_table(const neural::ModelDims& dims, std::size_t nodes) {
  const auto widths = dims.mlp_widths();
  std::vector<std::uint64_t> table{dims.memory_dim, dims.hidden_dim, dims.embed_dim, neural::kSignalDim,
                                   widths.size() - 1};
  table.insert(table.end(), widths.begin(), widths.end());
  table.push_back(nodes);
  return table;
}

}  // namespace

json to_json(const Config& cfg) {
  return json{{"variant", std::string(to_string(cfg.variant))},
              {"gamma", cfg.gamma},
              {"alpha", cfg.alpha},
              {"beta", cfg.beta},
              {"c", cfg.c},
              {"dims",
               {{"memory_dim", cfg.dims.memory_dim},
                {"hidden_dim", cfg.dims.hidden_dim},
                {"embed_dim", cfg.dims.embed_dim},
                {"mlp_hidden", cfg.dims.mlp_hidden}}},
              {"adam",
               {{"lr", cfg.adam.lr}, {"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"eps", cfg.adam.eps}}}};
}

Config config_from_json(const json& j) {
  try {
    Config cfg;
    cfg.variant = parse_variant(j.at("variant").get<std::string>());
    cfg.gamma = j.at("gamma").get<double>();
    cfg.alpha = j.at("alpha").get<std::uint32_t>();
    cfg.beta = j.at("beta").get<std::uint32_t>();
    cfg.c = j.at("c").get<double>();
    const auto& d = j.at("dims");
    cfg.dims.memory_dim = d.at("memory_dim").get<std::size_t>();
    cfg.dims.hidden_dim = d.at("hidden_dim").get<std::size_t>();
    cfg.dims.embed_dim = d.at("embed_dim").get<std::size_t>();
    cfg.dims.mlp_hidden = d.at("mlp_hidden").get<std::vector<std::size_t>>();
    const auto& a = j.at("adam");
    cfg.adam = {a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                a.at("eps").get<double>()};
    check_config(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CheckpointCorrupt, std::string("config: ") + e.what());
  }
}

void write_checkpoint_binary(std::ostream& out, const Checkpoint& ck) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kCheckpointVersion);
  const auto table = dimension_table(ck.params.dims, ck.memories.rows());
  put_u32(out, static_cast<std::uint32_t>(table.size()));
  for (auto x : table) put_u64(out, x);
  for (const auto* t : ck.params.tensors()) put_tensor(out, *t);
  put_tensor(out, ck.memories);
}

Checkpoint read_checkpoint_binary(std::istream& in, const Config& cfg) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorCode::CheckpointCorrupt, "bad magic");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::CheckpointCorrupt, "unsupported version " + std::to_string(version));
  const auto entries = get_u32(in);
  if (entries < 7 || entries > 1024) throw Error(ErrorCode::CheckpointCorrupt, "bad dimension table");
  std::vector<std::uint64_t> table(entries);
  for (auto& x : table) x = get_u64(in);
  const std::size_t nodes = table.back();
  if (dimension_table(cfg.dims, nodes) != table)
    throw Error(ErrorCode::CheckpointCorrupt, "dimension table disagrees with the sidecar config");

  Checkpoint ck;
  ck.cfg = cfg;
  ck.params = neural::ModelParams::zeros(cfg.dims);
  for (auto* t : ck.params.tensors()) get_tensor(in, *t);
  ck.memories = neural::Tensor::matrix(nodes, cfg.dims.memory_dim);
  get_tensor(in, ck.memories);
  return ck;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck, const json& metadata) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    write_checkpoint_binary(out, ck);
  }
  json side{{"format", "dynmis-checkpoint"},
            {"version", kCheckpointVersion},
            {"config", to_json(ck.cfg)},
            {"provenance", {{"seed", ck.provenance.seed}, {"epoch", ck.provenance.epoch}, {"loss", ck.provenance.loss}}},
            {"metadata", metadata}};
  std::ofstream out(sidecar_path(path));
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + sidecar_path(path).string());
  out << side.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto side_path = sidecar_path(path);
  if (!std::filesystem::exists(path) || !std::filesystem::exists(side_path))
    throw Error(ErrorCode::CheckpointMissing, path.string());
  json side;
  try {
    std::ifstream s(side_path);
    side = json::parse(s);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CheckpointCorrupt, std::string("sidecar: ") + e.what());
  }
  const Config cfg = config_from_json(side.at("config"));
  std::ifstream in(path, std::ios::binary);
  Checkpoint ck = read_checkpoint_binary(in, cfg);
  try {
    const auto& prov = side.at("provenance");
    ck.provenance = {prov.at("seed").get<std::uint64_t>(), prov.at("epoch").get<std::size_t>(),
                     prov.at("loss").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CheckpointCorrupt, std::string("provenance: ") + e.what());
  }
  return ck;
}

}  // namespace dynmis
