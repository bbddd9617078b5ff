// Copyright 2026 The splitplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "splitplan/arch.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "splitplan/error.hpp"

namespace splitplan {
namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

std::int64_t checked_dim(std::int64_t value, const char* what) {
  if (value < 1) {
    fail(ErrorCode::kNonPositiveOutput,
         std::string(what) + " produces output extent " +
             std::to_string(value));
  }
  return value;
}

std::string module_tag(const BottleneckModule& m) {
  return "module " + std::to_string(m.id);
}

TensorShape apply_branch(const std::vector<LayerSpec>& branch,
                         TensorShape shape, FlopCount& flops,
                         std::int64_t& pooled_elements) {
  for (const LayerSpec& layer : branch) {
    layer.validate();
    flops += layer_flops(layer, shape);
    shape = layer_output_shape(layer, shape);
    if (layer.kind == LayerKind::kMaxPool) pooled_elements += shape.elements();
  }
  return shape;
}

LayerKind parse_kind(const std::string& s) {
  if (s == "Conv") return LayerKind::kConv;
  if (s == "TransposeConv") return LayerKind::kTransposeConv;
  if (s == "MaxPool") return LayerKind::kMaxPool;
  if (s == "MaxUnpool") return LayerKind::kMaxUnpool;
  fail(ErrorCode::kParseError, "unknown layer kind '" + s + "'");
}

Sampling parse_sampling(const std::string& s) {
  if (s == "none" || s == "None") return Sampling::kNone;
  if (s == "down" || s == "Down") return Sampling::kDown;
  if (s == "up" || s == "Up") return Sampling::kUp;
  fail(ErrorCode::kParseError, "unknown sampling '" + s + "'");
}

std::int64_t get_int(const json& j, const char* key, std::int64_t fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) {
    fail(ErrorCode::kParseError, std::string("field '") + key +
                                     "' must be an integer");
  }
  return it->get<std::int64_t>();
}

std::int64_t require_int(const json& j, const char* key) {
  if (!j.contains(key)) {
    fail(ErrorCode::kParseError, std::string("missing field '") + key + "'");
  }
  return get_int(j, key, 0);
}

LayerSpec parse_layer(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kParseError, "layer must be an object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    fail(ErrorCode::kParseError, "layer is missing string field 'kind'");
  }
  LayerSpec layer;
  layer.kind = parse_kind(j["kind"].get<std::string>());
  layer.c_in = require_int(j, "c_in");
  layer.c_out = get_int(j, "c_out", layer.c_in);
  layer.kw = get_int(j, "kw", 1);
  layer.kh = get_int(j, "kh", 1);
  layer.pw = get_int(j, "pw", 0);
  layer.ph = get_int(j, "ph", 0);
  layer.sw = get_int(j, "sw", 1);
  layer.sh = get_int(j, "sh", 1);
  layer.dw = get_int(j, "dw", 1);
  layer.dh = get_int(j, "dh", 1);
  layer.pwo = get_int(j, "pwo", 0);
  layer.pho = get_int(j, "pho", 0);
  return layer;
}

std::vector<LayerSpec> parse_branch(const json& j, const char* key) {
  std::vector<LayerSpec> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) {
    fail(ErrorCode::kParseError, std::string("'") + key + "' must be an array");
  }
  for (const json& layer : *it) out.push_back(parse_layer(layer));
  return out;
}

}  // namespace

void LayerSpec::validate() const {
  auto bad = [](const std::string& msg) {
    fail(ErrorCode::kValidationError, msg);
  };
  if (c_in < 1 || c_out < 1) bad("channel counts must be >= 1");
  if (kw < 1 || kh < 1) bad("kernel dims must be >= 1");
  if (sw < 1 || sh < 1) bad("stride dims must be >= 1");
  if (dw < 1 || dh < 1) bad("dilation dims must be >= 1");
  if (pw < 0 || ph < 0 || pwo < 0 || pho < 0) bad("padding must be >= 0");
  if (kind != LayerKind::kTransposeConv && (pwo != 0 || pho != 0)) {
    bad("output padding is only valid on TransposeConv layers");
  }
  if ((kind == LayerKind::kMaxPool || kind == LayerKind::kMaxUnpool) &&
      c_in != c_out) {
    bad("pooling layers must preserve the channel count");
  }
}

bool BottleneckModule::has_layer(LayerKind kind) const {
  for (const auto* branch : {&main_branch, &skip_branch}) {
    for (const LayerSpec& layer : *branch) {
      if (layer.kind == kind) return true;
    }
  }
  return false;
}

std::int64_t conv_output_dim(std::int64_t x_in, const LayerSpec& layer,
                             Axis axis) {
  if (layer.kind != LayerKind::kConv && layer.kind != LayerKind::kMaxPool) {
    fail(ErrorCode::kInvalidArgument, "conv_output_dim needs Conv or MaxPool");
  }
  if (x_in < 1) fail(ErrorCode::kDomainError, "input extent must be >= 1");
  const std::int64_t numer = x_in + 2 * layer.padding(axis) -
                             layer.dilation(axis) * (layer.kernel(axis) - 1) -
                             1;
  // Floor division; numer may be negative.
  const std::int64_t s = layer.stride(axis);
  std::int64_t q = numer / s;
  if (numer % s != 0 && numer < 0) --q;
  return checked_dim(q + 1, "convolution");
}

std::int64_t transpose_output_dim(std::int64_t x_in, const LayerSpec& layer,
                                  Axis axis) {
  if (layer.kind != LayerKind::kTransposeConv) {
    fail(ErrorCode::kInvalidArgument,
         "transpose_output_dim needs a TransposeConv layer");
  }
  if (x_in < 1) fail(ErrorCode::kDomainError, "input extent must be >= 1");
  return checked_dim((x_in - 1) * layer.stride(axis) -
                         2 * layer.padding(axis) +
                         layer.dilation(axis) * (layer.kernel(axis) - 1) +
                         layer.output_padding(axis) + 1,
                     "transpose convolution");
}

std::int64_t unpool_output_dim(std::int64_t x_in, const LayerSpec& layer,
                               Axis axis) {
  if (layer.kind != LayerKind::kMaxUnpool) {
    fail(ErrorCode::kInvalidArgument, "unpool_output_dim needs a MaxUnpool layer");
  }
  if (x_in < 1) fail(ErrorCode::kDomainError, "input extent must be >= 1");
  return checked_dim((x_in - 1) * layer.stride(axis) - 2 * layer.padding(axis) +
                         layer.kernel(axis),
                     "unpooling");
}

TensorShape layer_output_shape(const LayerSpec& layer, const TensorShape& in) {
  if (in.channels != layer.c_in) {
    fail(ErrorCode::kShapeMismatch,
         "layer expects " + std::to_string(layer.c_in) +
             " input channels, got " + std::to_string(in.channels));
  }
  TensorShape out;
  out.channels = layer.c_out;
  switch (layer.kind) {
    case LayerKind::kConv:
    case LayerKind::kMaxPool:
      out.height = conv_output_dim(in.height, layer, Axis::kHeight);
      out.width = conv_output_dim(in.width, layer, Axis::kWidth);
      break;
    case LayerKind::kTransposeConv:
      out.height = transpose_output_dim(in.height, layer, Axis::kHeight);
      out.width = transpose_output_dim(in.width, layer, Axis::kWidth);
      break;
    case LayerKind::kMaxUnpool:
      out.height = unpool_output_dim(in.height, layer, Axis::kHeight);
      out.width = unpool_output_dim(in.width, layer, Axis::kWidth);
      break;
  }
  return out;
}

FlopCount layer_flops(const LayerSpec& layer, const TensorShape& in) {
  const TensorShape out = layer_output_shape(layer, in);
  const FlopCount spatial = out.height * out.width;
  switch (layer.kind) {
    case LayerKind::kConv:
    case LayerKind::kTransposeConv:
      return 2 * layer.c_in * layer.c_out * layer.kw * layer.kh * spatial;
    case LayerKind::kMaxPool:
      return (layer.kw * layer.kh - 1) * layer.c_out * spatial;
    case LayerKind::kMaxUnpool:
      return 0;
  }
  return 0;
}

std::int64_t default_pool_bits(const LayerSpec& pool) {
  std::int64_t bits = 0;
  while ((std::int64_t{1} << bits) < pool.kw * pool.kh) ++bits;
  return bits;
}

CutProfile propagate(const Architecture& arch) {
  const TensorShape& in = arch.input_shape;
  if (in.channels < 1 || in.height < 1 || in.width < 1) {
    fail(ErrorCode::kValidationError, "input shape dims must be >= 1");
  }
  if (arch.bits_per_element < 1) {
    fail(ErrorCode::kValidationError, "bits_per_element must be >= 1");
  }

  const std::size_t num_modules = arch.modules.size();
  CutProfile profile;
  profile.cum_workload.assign(num_modules + 1, 0);
  profile.transmit_bits.assign(num_modules + 1, 0);
  profile.index_bits.assign(num_modules + 1, 0);
  profile.shapes.assign(num_modules + 1, in);
  profile.transmit_bits[0] = in.elements() * arch.bits_per_element;

  // Index payload of each pool-bearing Down module and the (1-based) position
  // of the Up module that consumes it.
  struct PendingIndex {
    std::size_t down = 0;
    std::size_t up = 0;
    BitCount bits = 0;
  };
  std::vector<PendingIndex> pairs;
  std::vector<std::size_t> open;  // indices into `pairs`, LIFO

  int downs = 0;
  int ups = 0;
  TensorShape shape = in;
  for (std::size_t i = 0; i < num_modules; ++i) {
    const BottleneckModule& m = arch.modules[i];
    if (m.main_branch.empty()) {
      fail(ErrorCode::kValidationError, module_tag(m) + ": empty main branch");
    }
    if (m.pool_bits_per_element < 0) {
      fail(ErrorCode::kValidationError,
           module_tag(m) + ": pool_bits_per_element must be >= 0");
    }
    FlopCount flops = 0;
    std::int64_t pooled = 0;
    TensorShape main_out, skip_out;
    try {
      main_out = apply_branch(m.main_branch, shape, flops, pooled);
      skip_out = apply_branch(m.skip_branch, shape, flops, pooled);
    } catch (const Error& e) {
      throw Error(e.code(), module_tag(m) + ": " + e.what());
    }
    if (main_out != skip_out) {
      fail(ErrorCode::kShapeMismatch,
           module_tag(m) + ": main and skip branches disagree on output shape");
    }

    const bool shrinks =
        main_out.height < shape.height && main_out.width < shape.width;
    const bool grows =
        main_out.height > shape.height && main_out.width > shape.width;
    const bool keeps =
        main_out.height == shape.height && main_out.width == shape.width;
    switch (m.sampling) {
      case Sampling::kDown:
        if (!shrinks) {
          fail(ErrorCode::kValidationError,
               module_tag(m) + ": Down module must shrink both spatial dims");
        }
        ++downs;
        break;
      case Sampling::kUp:
        if (!grows) {
          fail(ErrorCode::kValidationError,
               module_tag(m) + ": Up module must grow both spatial dims");
        }
        ++ups;
        break;
      case Sampling::kNone:
        if (!keeps) {
          fail(ErrorCode::kValidationError,
               module_tag(m) + ": module without sampling changed spatial dims");
        }
        break;
    }

    const bool pools = m.has_layer(LayerKind::kMaxPool);
    const bool unpools = m.has_layer(LayerKind::kMaxUnpool);
    if (pools && m.sampling != Sampling::kDown) {
      fail(ErrorCode::kPairingError,
           module_tag(m) + ": MaxPool is only allowed in Down modules");
    }
    if (unpools && m.sampling != Sampling::kUp) {
      fail(ErrorCode::kPairingError,
           module_tag(m) + ": MaxUnpool is only allowed in Up modules");
    }
    if (pools) {
      pairs.push_back({i + 1, 0, m.pool_bits_per_element * pooled});
      open.push_back(pairs.size() - 1);
    }
    if (unpools) {
      if (open.empty()) {
        fail(ErrorCode::kPairingError,
             module_tag(m) + ": MaxUnpool has no preceding MaxPool module");
      }
      pairs[open.back()].up = i + 1;
      open.pop_back();
    }

    profile.cum_workload[i + 1] = profile.cum_workload[i] + flops;
    profile.transmit_bits[i + 1] = main_out.elements() * arch.bits_per_element;
    profile.shapes[i + 1] = main_out;
    shape = main_out;
  }

  if (!open.empty()) {
    fail(ErrorCode::kPairingError,
         module_tag(arch.modules[pairs[open.back()].down - 1]) +
             ": MaxPool indices are never consumed by a MaxUnpool");
  }
  if (downs != ups) {
    fail(ErrorCode::kValidationError,
         "architecture has " + std::to_string(downs) + " Down and " +
             std::to_string(ups) + " Up modules");
  }
  if (shape.height != in.height || shape.width != in.width) {
    fail(ErrorCode::kValidationError,
         "final spatial dims differ from the input spatial dims");
  }

  for (const PendingIndex& p : pairs) {
    for (std::size_t cut = p.down; cut < p.up; ++cut) {
      profile.index_bits[cut] += p.bits;
    }
  }
  profile.total_workload = profile.cum_workload.back();
  return profile;
}

Architecture load_architecture(std::string_view config_text) {
  json root;
  try {
    root = json::parse(config_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, e.what());
  }
  if (!root.is_object()) {
    fail(ErrorCode::kParseError, "architecture config must be a JSON object");
  }

  Architecture arch;
  arch.bits_per_element = get_int(root, "bits_per_element", 32);
  if (!root.contains("input") || !root["input"].is_object()) {
    fail(ErrorCode::kParseError, "missing object field 'input'");
  }
  const json& input = root["input"];
  arch.input_shape = {require_int(input, "channels"),
                      require_int(input, "height"),
                      require_int(input, "width")};

  if (!root.contains("modules") || !root["modules"].is_array()) {
    fail(ErrorCode::kParseError, "missing array field 'modules'");
  }
  int next_id = 1;
  for (const json& jm : root["modules"]) {
    if (!jm.is_object()) fail(ErrorCode::kParseError, "module must be an object");
    BottleneckModule m;
    m.id = static_cast<int>(get_int(jm, "id", next_id));
    next_id = m.id + 1;
    if (jm.contains("sampling")) {
      if (!jm["sampling"].is_string()) {
        fail(ErrorCode::kParseError, "field 'sampling' must be a string");
      }
      m.sampling = parse_sampling(jm["sampling"].get<std::string>());
    }
    try {
      m.main_branch = parse_branch(jm, "main_branch");
      m.skip_branch = parse_branch(jm, "skip_branch");
    } catch (const Error& e) {
      throw Error(e.code(), module_tag(m) + ": " + e.what());
    }
    if (jm.contains("pool_bits_per_element")) {
      m.pool_bits_per_element = get_int(jm, "pool_bits_per_element", 0);
    } else {
      for (const auto* branch : {&m.main_branch, &m.skip_branch}) {
        for (const LayerSpec& layer : *branch) {
          if (layer.kind == LayerKind::kMaxPool && m.pool_bits_per_element == 0) {
            m.pool_bits_per_element = default_pool_bits(layer);
          }
        }
      }
    }
    arch.modules.push_back(std::move(m));
  }
  if (arch.modules.empty()) {
    fail(ErrorCode::kValidationError, "architecture has no modules");
  }

  try {
    propagate(arch);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kValidationError, e.what());
  }
  return arch;
}

Architecture load_architecture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open architecture file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_architecture(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "Conv";
    case LayerKind::kTransposeConv: return "TransposeConv";
    case LayerKind::kMaxPool: return "MaxPool";
    case LayerKind::kMaxUnpool: return "MaxUnpool";
  }
  return "?";
}

std::string_view to_string(Sampling sampling) {
  switch (sampling) {
    case Sampling::kNone: return "none";
    case Sampling::kDown: return "down";
    case Sampling::kUp: return "up";
  }
  return "?";
}

}  // namespace splitplan
