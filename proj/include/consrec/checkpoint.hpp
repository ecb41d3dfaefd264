#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "consrec/error.hpp"
#include "consrec/model.hpp"

namespace consrec {

inline constexpr int kCheckpointSchemaVersion = 1;

struct CheckpointMeta {
  std::size_t dim = 0;
  std::size_t layers = 0;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_groups = 0;
  std::uint64_t seed = 0;
};

struct Checkpoint {
  CheckpointMeta meta;
  ModelParams params;
};

namespace detail {

inline std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

inline std::vector<std::pair<std::size_t, std::size_t>> expected_shapes(const CheckpointMeta& m) {
  const std::size_t d = m.dim;
  return {{m.num_users, d}, {m.num_items, d}, {m.num_groups, d}, {3 * d, d}, {d, 1}, {d, 1}, {d, 1},
          {d, d},           {1, d},           {d, d},            {1, d},     {d, 1}, {1, 1}};
}

}  // namespace detail

// Directory with manifest.json and one <name>.bin per tensor (row-major,
// little-endian float64).
inline void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kCheckpointSchemaVersion;
  manifest["element_type"] = "float64";
  manifest["byte_order"] = "little";
  manifest["dim"] = meta.dim;
  manifest["layers"] = meta.layers;
  manifest["num_users"] = meta.num_users;
  manifest["num_items"] = meta.num_items;
  manifest["num_groups"] = meta.num_groups;
  manifest["seed"] = meta.seed;
  manifest["tensors"] = nlohmann::ordered_json::array();
  params.for_each([&](std::string_view name, const Matrix& m) {
    const std::string file = std::string(name) + ".bin";
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / file).string());
    for (double v : m.data()) {
      const std::uint64_t bits = detail::to_little(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) throw DataError("write failed: " + (dir / file).string());
    manifest["tensors"].push_back({{"name", name}, {"file", file}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

// Loads and validates a checkpoint. When `expected` is given, dim and layers
// must match it.
inline Checkpoint load_checkpoint(const std::filesystem::path& dir,
                                  const std::optional<ModelConfig>& expected = std::nullopt) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("missing file: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  Checkpoint ck;
  try {
    if (manifest.at("schema_version").get<int>() != kCheckpointSchemaVersion) {
      throw DataError("checkpoint schema version " + manifest.at("schema_version").dump() +
                      " is not supported (expected " + std::to_string(kCheckpointSchemaVersion) + ")");
    }
    if (manifest.at("element_type") != "float64" || manifest.at("byte_order") != "little") {
      throw DataError("checkpoint must hold little-endian float64 tensors");
    }
    ck.meta.dim = manifest.at("dim").get<std::size_t>();
    ck.meta.layers = manifest.at("layers").get<std::size_t>();
    ck.meta.num_users = manifest.at("num_users").get<std::size_t>();
    ck.meta.num_items = manifest.at("num_items").get<std::size_t>();
    ck.meta.num_groups = manifest.at("num_groups").get<std::size_t>();
    ck.meta.seed = manifest.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (expected && (expected->dim != ck.meta.dim || expected->layers != ck.meta.layers)) {
    throw DataError("checkpoint has dim " + std::to_string(ck.meta.dim) + ", layers " +
                    std::to_string(ck.meta.layers) + " but config expects dim " + std::to_string(expected->dim) +
                    ", layers " + std::to_string(expected->layers));
  }

  const auto shapes = detail::expected_shapes(ck.meta);
  const auto& tensors = manifest.at("tensors");
  if (!tensors.is_array() || tensors.size() != ModelParams::kTensorCount) {
    throw DataError(manifest_path.string() + ": expected " + std::to_string(ModelParams::kTensorCount) + " tensors");
  }
  std::size_t k = 0;
  ck.params.for_each([&](std::string_view name, Matrix& m) {
    const auto& t = tensors[k];
    const auto [rows, cols] = shapes[k++];
    if (t.at("name") != name) throw DataError("checkpoint tensor order mismatch at " + std::string(name));
    if (t.at("rows").get<std::size_t>() != rows || t.at("cols").get<std::size_t>() != cols) {
      throw DataError("checkpoint shape mismatch for " + std::string(name) + ": manifest says " +
                      t.at("rows").dump() + "x" + t.at("cols").dump() + ", expected " + std::to_string(rows) +
                      "x" + std::to_string(cols));
    }
    const auto file = dir / t.at("file").get<std::string>();
    std::ifstream bin(file, std::ios::binary);
    if (!bin) throw DataError("missing file: " + file.string());
    std::vector<double> data(rows * cols);
    for (auto& v : data) {
      std::uint64_t bits = 0;
      if (!bin.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw DataError("truncated tensor file: " + file.string());
      }
      v = std::bit_cast<double>(detail::to_little(bits));
    }
    if (bin.peek() != std::char_traits<char>::eof()) {
      throw DataError("tensor file longer than its shape: " + file.string());
    }
    m = Matrix(rows, cols, std::move(data));
  });
  return ck;
}

}  // namespace consrec
