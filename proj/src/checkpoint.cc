// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "nerprune/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nerprune/errors.h"

namespace nerprune {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path.string());
}

std::string encode_f64(std::span<const double> values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  return bytes;
}

std::vector<double> decode_f64(const std::string& bytes) {
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes[i * 8 + b]))
              << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace

void save_checkpoint(const fs::path& dir, std::span<const ParamTensor> params,
                     PruneStrategy strategy, const nlohmann::json& extra) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = 1;
  manifest["strategy"] = to_string(strategy);
  manifest["achieved_sparsity"] = measure_sparsity(params, strategy);
  manifest["tensors"] = nlohmann::ordered_json::array();
  for (const ParamTensor& p : params) {
    const std::string values_file = p.name() + ".f64";
    const std::string mask_file = p.name() + ".mask";
    write_file(dir / values_file, encode_f64(p.values()));
    auto mask = p.mask();
    write_file(dir / mask_file, std::string(mask.begin(), mask.end()));
    manifest["tensors"].push_back({{"name", p.name()},
                                   {"shape", p.shape()},
                                   {"role", to_string(p.role())},
                                   {"values", values_file},
                                   {"mask", mask_file}});
  }
  manifest["extra"] = extra;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint manifest in " + dir.string() + ": " +
                    e.what());
  }
  Checkpoint ckpt;
  try {
    auto strategy = parse_strategy(manifest.at("strategy").get<std::string>());
    if (!strategy) throw DataError("unknown strategy in checkpoint manifest");
    ckpt.strategy = *strategy;
    ckpt.achieved_sparsity = manifest.at("achieved_sparsity").get<double>();
    for (const auto& t : manifest.at("tensors")) {
      auto role = parse_role(t.at("role").get<std::string>());
      if (!role) throw DataError("unknown tensor role in checkpoint manifest");
      auto values = decode_f64(read_file(dir / t.at("values").get<std::string>()));
      std::string mask = read_file(dir / t.at("mask").get<std::string>());
      ParamTensor p(t.at("name").get<std::string>(),
                    t.at("shape").get<std::vector<std::size_t>>(), *role,
                    std::move(values));
      if (mask.size() != p.size()) {
        throw DataError("mask size mismatch for tensor " + p.name());
      }
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] != 0 && mask[i] != 1) {
          throw DataError("mask for tensor " + p.name() + " is not binary");
        }
        p.mask()[i] = static_cast<std::uint8_t>(mask[i]);
      }
      ckpt.params.push_back(std::move(p));
    }
    if (manifest.contains("extra")) ckpt.extra = manifest["extra"];
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint manifest in " + dir.string() + ": " +
                    e.what());
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw DataError(e.what());
  }
  return ckpt;
}

}  // namespace nerprune
