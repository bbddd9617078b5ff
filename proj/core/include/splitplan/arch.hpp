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

#ifndef SPLITPLAN_ARCH_HPP_
#define SPLITPLAN_ARCH_HPP_

// Structural model of bottleneck-module (BM) segmentation networks.
//
// Nothing here executes a network. Layers are described by their geometric
// parameters only, and the module computes output shapes, FLOP counts and the
// per-cut profile (local work, activation bits, pooling-index bits) that the
// allocation solvers consume.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace splitplan {

/// FLOP counts and bit counts. Reference architectures reach ~1e10 FLOPs and
/// ~1e9 bits per image, so everything is carried in 64 bits.
using FlopCount = std::int64_t;
using BitCount = std::int64_t;

enum class LayerKind { kConv, kTransposeConv, kMaxPool, kMaxUnpool };

enum class Axis { kHeight, kWidth };

enum class Sampling { kNone, kDown, kUp };

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  std::int64_t c_in = 1;
  std::int64_t c_out = 1;
  std::int64_t kw = 1, kh = 1;
  std::int64_t pw = 0, ph = 0;
  std::int64_t sw = 1, sh = 1;
  std::int64_t dw = 1, dh = 1;
  // Output padding; only meaningful for transpose convolutions.
  std::int64_t pwo = 0, pho = 0;

  std::int64_t kernel(Axis axis) const { return axis == Axis::kWidth ? kw : kh; }
  std::int64_t padding(Axis axis) const { return axis == Axis::kWidth ? pw : ph; }
  std::int64_t stride(Axis axis) const { return axis == Axis::kWidth ? sw : sh; }
  std::int64_t dilation(Axis axis) const { return axis == Axis::kWidth ? dw : dh; }
  std::int64_t output_padding(Axis axis) const {
    return axis == Axis::kWidth ? pwo : pho;
  }

  /// Throws ValidationError when kernel/stride/dilation are < 1, paddings are
  /// negative, output padding is set on a non-transpose layer, or a pooling
  /// layer changes the channel count.
  void validate() const;
};

struct TensorShape {
  std::int64_t channels = 1;
  std::int64_t height = 1;
  std::int64_t width = 1;

  std::int64_t elements() const { return channels * height * width; }
  std::int64_t extent(Axis axis) const {
    return axis == Axis::kWidth ? width : height;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

struct BottleneckModule {
  int id = 0;
  std::vector<LayerSpec> main_branch;
  // Empty means identity.
  std::vector<LayerSpec> skip_branch;
  Sampling sampling = Sampling::kNone;
  // Index bits stored per pooled output element of each MaxPool layer.
  std::int64_t pool_bits_per_element = 0;

  bool has_layer(LayerKind kind) const;
};

struct Architecture {
  std::vector<BottleneckModule> modules;
  TensorShape input_shape;
  std::int64_t bits_per_element = 32;
};

/// Per-cut profile. Cut 0 sends the raw input; cut l >= 1 sends the output of
/// BM l after running BMs 1..l on the device. All vectors have L + 1 entries.
struct CutProfile {
  std::vector<FlopCount> cum_workload;
  std::vector<BitCount> transmit_bits;
  std::vector<BitCount> index_bits;
  std::vector<TensorShape> shapes;
  FlopCount total_workload = 0;

  int num_modules() const { return static_cast<int>(cum_workload.size()) - 1; }
  int num_cuts() const { return static_cast<int>(cum_workload.size()); }
  /// D_l + tau_l.
  BitCount payload_bits(int cut) const {
    return transmit_bits[cut] + index_bits[cut];
  }
  /// Workload left for the server after cutting at `cut`.
  FlopCount residual_workload(int cut) const {
    return total_workload - cum_workload[cut];
  }
  /// Workload of BM l alone (1-based).
  FlopCount module_workload(int l) const {
    return cum_workload[l] - cum_workload[l - 1];
  }
};

std::int64_t conv_output_dim(std::int64_t x_in, const LayerSpec& layer, Axis axis);
std::int64_t transpose_output_dim(std::int64_t x_in, const LayerSpec& layer,
                                  Axis axis);
std::int64_t unpool_output_dim(std::int64_t x_in, const LayerSpec& layer,
                               Axis axis);

/// Dispatches on layer.kind. Checks the channel count against c_in.
TensorShape layer_output_shape(const LayerSpec& layer, const TensorShape& in);

FlopCount layer_flops(const LayerSpec& layer, const TensorShape& in);

/// Smallest b with 2^b >= kw * kh; the default index width for a pool kernel.
std::int64_t default_pool_bits(const LayerSpec& pool);

/// Checks the structural invariants (branch agreement, sampling direction,
/// up/down balance, LIFO pool/unpool pairing, shape round trip) and returns
/// the cut profile.
CutProfile propagate(const Architecture& arch);

/// Parses the JSON architecture format and validates it with propagate().
Architecture load_architecture(std::string_view config_text);
Architecture load_architecture_file(const std::string& path);

std::string_view to_string(LayerKind kind);
std::string_view to_string(Sampling sampling);

}  // namespace splitplan

#endif  // SPLITPLAN_ARCH_HPP_
