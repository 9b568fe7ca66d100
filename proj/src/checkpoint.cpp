// Copyright 2026 The MultiNet-ViT Authors
// SPDX-License-Identifier: Apache-2.0

#include "multinet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include "multinet/errors.hpp"

namespace multinet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

const StoredTensor* CheckpointData::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename T>
CheckpointData make_checkpoint(const ParameterList<T>& params, const OptimizerState<T>* state,
                               const std::string& pairing, const nlohmann::json& config) {
  CheckpointData data;
  data.pairing = pairing;
  data.config = config;
  data.dtype = sizeof(T) == 4 ? "f32" : "f64";
  for (const auto& p : params) {
    auto v = p.tensor.data();
    data.tensors.push_back({p.name, p.tensor.shape(), std::vector<double>(v.begin(), v.end())});
  }
  if (state) {
    data.has_optimizer = true;
    data.optimizer_step = state->step;
    for (std::size_t i = 0; i < state->m.size(); ++i) {
      data.optimizer.push_back({"m/" + state->names[i], state->shapes[i],
                                std::vector<double>(state->m[i].begin(), state->m[i].end())});
      data.optimizer.push_back({"v/" + state->names[i], state->shapes[i],
                                std::vector<double>(state->v[i].begin(), state->v[i].end())});
    }
  }
  return data;
}

namespace {

template <typename Int>
void put(std::vector<std::uint8_t>& out, Int value) {
  std::uint8_t raw[sizeof(Int)];
  std::memcpy(raw, &value, sizeof(Int));
  out.insert(out.end(), raw, raw + sizeof(Int));
}

template <typename Int>
Int take(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(Int) > in.size()) throw CheckpointError("checkpoint is truncated");
  Int value;
  std::memcpy(&value, in.data() + pos, sizeof(Int));
  pos += sizeof(Int);
  return value;
}

std::size_t element_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "f64") return 8;
  throw CheckpointError("unsupported checkpoint dtype '" + dtype + "'");
}

nlohmann::json directory(const std::vector<StoredTensor>& tensors, const std::string& dtype, std::uint64_t& offset) {
  nlohmann::json list = nlohmann::json::array();
  const std::size_t width = element_size(dtype);
  for (const auto& t : tensors) {
    const std::uint64_t nbytes = t.values.size() * width;
    list.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", dtype}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  return list;
}

void append_payload(std::vector<std::uint8_t>& out, const std::vector<StoredTensor>& tensors, const std::string& dtype) {
  for (const auto& t : tensors) {
    for (double v : t.values) {
      if (dtype == "f32") {
        put(out, static_cast<float>(v));
      } else {
        put(out, v);
      }
    }
  }
}

std::vector<StoredTensor> read_directory(const nlohmann::json& list, const std::vector<std::uint8_t>& bytes,
                                         std::size_t payload_start) {
  std::vector<StoredTensor> out;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (const auto& entry : list) {
    StoredTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<Shape>();
    const auto dtype = entry.at("dtype").get<std::string>();
    const std::size_t width = element_size(dtype);
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    const std::uint64_t nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (nbytes != shape_numel(t.shape) * width) {
      throw CheckpointError("tensor '" + t.name + "' byte count does not match its shape " + shape_str(t.shape));
    }
    if (payload_start + offset + nbytes > bytes.size()) {
      throw CheckpointError("tensor '" + t.name + "' extends past the end of the checkpoint");
    }
    ranges.emplace_back(offset, offset + nbytes);
    std::size_t pos = payload_start + offset;
    t.values.resize(shape_numel(t.shape));
    for (auto& v : t.values) v = width == 4 ? static_cast<double>(take<float>(bytes, pos)) : take<double>(bytes, pos);
    out.push_back(std::move(t));
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) throw CheckpointError("checkpoint tensor payloads overlap");
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const CheckpointData& data) {
  std::uint64_t offset = 0;
  nlohmann::json header;
  header["format_version"] = data.version;
  header["pairing"] = data.pairing;
  header["dtype"] = data.dtype;
  header["config"] = data.config;
  header["tensors"] = directory(data.tensors, data.dtype, offset);
  if (data.has_optimizer) {
    header["optimizer"] = {{"kind", "adam"},
                           {"step", data.optimizer_step},
                           {"tensors", directory(data.optimizer, data.dtype, offset)}};
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put(out, data.version);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  append_payload(out, data.tensors, data.dtype);
  if (data.has_optimizer) append_payload(out, data.optimizer, data.dtype);
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  const auto bytes = serialize_checkpoint(data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing " + path.string());
}

CheckpointData deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      !std::equal(std::begin(kCheckpointMagic), std::end(kCheckpointMagic), bytes.begin())) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto header_len = take<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) throw CheckpointError("checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const std::size_t payload = pos + header_len;
  CheckpointData data;
  try {
    data.version = version;
    data.pairing = header.at("pairing").get<std::string>();
    data.dtype = header.at("dtype").get<std::string>();
    element_size(data.dtype);
    data.config = header.at("config");
    data.tensors = read_directory(header.at("tensors"), bytes, payload);
    if (header.contains("optimizer")) {
      data.has_optimizer = true;
      data.optimizer_step = header["optimizer"].at("step").get<std::uint64_t>();
      data.optimizer = read_directory(header["optimizer"].at("tensors"), bytes, payload);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint header: ") + e.what());
  }
  std::unordered_map<std::string, int> seen;
  for (const auto& t : data.tensors) {
    if (seen[t.name]++) throw CheckpointError("tensor '" + t.name + "' appears twice in the checkpoint");
  }
  return data;
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

template <typename T>
std::vector<std::string> load_parameters(const CheckpointData& data, ParameterList<T>& params,
                                         const LoadOptions& options) {
  std::unordered_map<std::string, const StoredTensor*> by_name;
  for (const auto& t : data.tensors) {
    if (t.name.rfind(options.source_prefix, 0) != 0) continue;
    by_name[options.target_prefix + t.name.substr(options.source_prefix.size())] = &t;
  }
  std::vector<std::string> loaded;
  for (auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      if (options.strict) throw CheckpointError("checkpoint has no tensor for parameter '" + p.name + "'");
      continue;
    }
    const StoredTensor& src = *it->second;
    if (src.shape != p.tensor.shape()) {
      throw ShapeError("tensor '" + p.name + "': checkpoint shape " + shape_str(src.shape) + " vs model shape " +
                       shape_str(p.tensor.shape()));
    }
    auto dst = p.tensor.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(src.values[i]);
    loaded.push_back(p.name);
  }
  if (options.strict && loaded.size() != by_name.size()) {
    for (const auto& [name, t] : by_name) {
      if (std::find(loaded.begin(), loaded.end(), name) == loaded.end()) {
        throw CheckpointError("checkpoint tensor '" + name + "' has no matching model parameter");
      }
    }
  }
  return loaded;
}

template <typename T>
OptimizerState<T> load_optimizer_state(const CheckpointData& data, const ParameterList<T>& params) {
  if (!data.has_optimizer) throw CheckpointError("checkpoint carries no optimizer state");
  std::unordered_map<std::string, const StoredTensor*> by_name;
  for (const auto& t : data.optimizer) by_name[t.name] = &t;
  OptimizerState<T> state;
  state.step = data.optimizer_step;
  for (const auto& p : params) {
    state.names.push_back(p.name);
    state.shapes.push_back(p.tensor.shape());
    for (const char* kind : {"m/", "v/"}) {
      auto it = by_name.find(kind + p.name);
      if (it == by_name.end()) throw CheckpointError("optimizer state missing '" + std::string(kind) + p.name + "'");
      if (it->second->shape != p.tensor.shape()) {
        throw ShapeError("optimizer moment '" + std::string(kind) + p.name + "' has shape " +
                         shape_str(it->second->shape) + ", parameter has " + shape_str(p.tensor.shape()));
      }
      std::vector<T> values(it->second->values.begin(), it->second->values.end());
      (kind[0] == 'm' ? state.m : state.v).push_back(std::move(values));
    }
  }
  return state;
}

#define MULTINET_INSTANTIATE_CHECKPOINT(T)                                                                        \
  template CheckpointData make_checkpoint(const ParameterList<T>&, const OptimizerState<T>*, const std::string&, \
                                          const nlohmann::json&);                                                 \
  template std::vector<std::string> load_parameters(const CheckpointData&, ParameterList<T>&, const LoadOptions&); \
  template OptimizerState<T> load_optimizer_state(const CheckpointData&, const ParameterList<T>&);

MULTINET_INSTANTIATE_CHECKPOINT(float)
MULTINET_INSTANTIATE_CHECKPOINT(double)

}  // namespace multinet
