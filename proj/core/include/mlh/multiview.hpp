#pragma once

#include <array>
#include <memory>
#include <optional>

#include "mlh/descriptor.hpp"
#include "mlh/layers.hpp"
#include "mlh/sgd.hpp"

namespace mlh {

enum class MergeKind : std::uint8_t {
  ElementwiseMax = 0,  // commutative, discards view identity
  ConcatConv = 1,      // depth concat in (X, Y, Z) order + 3x3 conv, non-commutative
};

/// Which branch won each element of a max merge; 0-based branch index, ties
/// resolved to the lowest index so training stays deterministic.
struct MaxMergeCache {
  std::vector<std::uint8_t> argmax;
  std::vector<std::size_t> shape;
};

template <typename T>
Tensor<T> merge_max(const std::array<const Tensor<T>*, 3>& views, MaxMergeCache* cache = nullptr) {
  require_same_shape(*views[0], *views[1], "merge_max");
  require_same_shape(*views[0], *views[2], "merge_max");
  Tensor<T> out = *views[0];
  if (cache) {
    cache->shape = out.shape;
    cache->argmax.assign(out.numel(), 0);
  }
  for (std::size_t i = 0; i < out.numel(); ++i) {
    for (std::uint8_t v = 1; v < 3; ++v) {
      const T candidate = (*views[v])[i];
      if (candidate > out[i]) {
        out[i] = candidate;
        if (cache) cache->argmax[i] = v;
      }
    }
  }
  return out;
}

template <typename T>
std::array<Tensor<T>, 3> merge_max_backward(const Tensor<T>& gy, const MaxMergeCache& cache) {
  if (gy.shape != cache.shape) throw ShapeMismatch("merge_max backward shape");
  std::array<Tensor<T>, 3> grads = {Tensor<T>(cache.shape), Tensor<T>(cache.shape),
                                    Tensor<T>(cache.shape)};
  for (std::size_t i = 0; i < gy.numel(); ++i) grads[cache.argmax[i]][i] = gy[i];
  return grads;
}

/// Depth concatenation in the fixed (X, Y, Z) branch order.
template <typename T>
Tensor<T> concat_channels(const std::array<const Tensor<T>*, 3>& views) {
  require_same_shape(*views[0], *views[1], "concat_channels");
  require_same_shape(*views[0], *views[2], "concat_channels");
  const Tensor<T>& v0 = *views[0];
  if (v0.rank() != 4) throw ShapeMismatch("concat_channels expects [B, D, H, W]");
  const std::size_t batch = v0.dim(0), depth = v0.dim(1), plane = v0.dim(2) * v0.dim(3);
  Tensor<T> out({batch, 3 * depth, v0.dim(2), v0.dim(3)});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t v = 0; v < 3; ++v) {
      const T* src = views[v]->data.data() + b * depth * plane;
      T* dst = out.data.data() + (b * 3 + v) * depth * plane;
      std::copy(src, src + depth * plane, dst);
    }
  }
  return out;
}

template <typename T>
std::array<Tensor<T>, 3> split_channels(const Tensor<T>& merged) {
  if (merged.rank() != 4 || merged.dim(1) % 3 != 0) {
    throw ShapeMismatch("split_channels expects [B, 3D, H, W]");
  }
  const std::size_t batch = merged.dim(0), depth = merged.dim(1) / 3,
                    plane = merged.dim(2) * merged.dim(3);
  std::array<Tensor<T>, 3> out = {Tensor<T>({batch, depth, merged.dim(2), merged.dim(3)}),
                                  Tensor<T>({batch, depth, merged.dim(2), merged.dim(3)}),
                                  Tensor<T>({batch, depth, merged.dim(2), merged.dim(3)})};
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t v = 0; v < 3; ++v) {
      const T* src = merged.data.data() + (b * 3 + v) * depth * plane;
      std::copy(src, src + depth * plane, out[v].data.data() + b * depth * plane);
    }
  }
  return out;
}

/// Concat-then-convolve merge: [B, D, H, W] x3 -> concat [B, 3D, H, W] ->
/// 3x3 conv with D filters (pad 1, stride 1) -> [B, D, H, W]. The conv layer
/// carries the trainable weights that make the merge non-commutative.
template <typename T>
Tensor<T> merge_concat_conv(const std::array<const Tensor<T>*, 3>& views, Conv2D<T>& conv) {
  const std::size_t depth = views[0]->dim(1);
  if (conv.in_channels() != 3 * depth || conv.out_channels() != depth) {
    throw ShapeMismatch("merge conv must map 3D -> D channels");
  }
  return conv.forward(concat_channels(views), true);
}

/// First-layer channel expansion: a [D, 3, kh, kw] kernel trained on
/// 3-channel inputs becomes a [D, 5, kh, kw] kernel by copying the source
/// channels to slots 1, 3 and 5 and placing the channel mean in slots 2 and
/// 4 (1-based). k = 3 is an identity copy; other widths are rejected.
template <typename T>
Tensor<T> expand_input_weights(const Tensor<T>& w3, std::size_t k) {
  if (w3.rank() != 4 || w3.dim(1) != 3) {
    throw ShapeMismatch("expand_input_weights expects [D, 3, kh, kw], got " + shape_string(w3));
  }
  if (k == 3) return w3;
  if (k != 5) {
    throw UnsupportedK("channel expansion is defined for k in {3, 5}, got " + std::to_string(k));
  }
  const std::size_t filters = w3.dim(0), kh = w3.dim(2), kw = w3.dim(3), taps = kh * kw;
  Tensor<T> out({filters, 5, kh, kw});
  for (std::size_t f = 0; f < filters; ++f) {
    const T* src = w3.data.data() + f * 3 * taps;
    T* dst = out.data.data() + f * 5 * taps;
    for (std::size_t t = 0; t < taps; ++t) {
      const T c0 = src[0 * taps + t], c1 = src[1 * taps + t], c2 = src[2 * taps + t];
      const T mean = (c0 + c1 + c2) / T(3);
      dst[0 * taps + t] = c0;
      dst[1 * taps + t] = mean;
      dst[2 * taps + t] = c1;
      dst[3 * taps + t] = mean;
      dst[4 * taps + t] = c2;
    }
  }
  return out;
}

struct MultiViewConfig {
  bool shared = false;
  MergeKind merge = MergeKind::ConcatConv;
  std::size_t classes = 4;
  std::size_t n = 32;             // descriptor resolution, must be a multiple of 8
  std::size_t k = 5;              // descriptor layers = input channels
  std::size_t conv_channels = 32; // per-branch activation depth D
  std::size_t fc_width = 128;

  void validate() const {
    if (classes < 2) throw ConfigInvalid("need at least 2 classes");
    if (n < 8 || n % 8 != 0) throw ConfigInvalid("grid resolution must be a multiple of 8");
    if (k < 1 || conv_channels < 1 || fc_width < 1) throw ConfigInvalid("bad network widths");
  }
};

/// Three per-view conv branches, a merge, and a fully connected head. With
/// shared = true the branches are kept as three bitwise-identical replicas:
/// gradients from all views are summed and every replica receives the same
/// update, which is equivalent to a single shared parameter set.
template <typename T>
class MultiViewNetwork {
 public:
  MultiViewConfig config;
  std::array<Sequential<T>, 3> branches;
  std::unique_ptr<Conv2D<T>> merge_conv;  // ConcatConv only
  Sequential<T> head;

  /// views in (X, Y, Z) order, each [B, k, n, n]. Parallelism lives inside
  /// the layer kernels; every output element is owned by one task, so the
  /// result does not depend on the thread count.
  Tensor<T> forward(const std::array<Tensor<T>, 3>& views, bool train) {
    std::array<Tensor<T>, 3> acts;
    for (std::size_t v = 0; v < 3; ++v) acts[v] = branches[v].forward(views[v], train);
    Tensor<T> merged;
    const std::array<const Tensor<T>*, 3> ptrs = {&acts[0], &acts[1], &acts[2]};
    if (config.merge == MergeKind::ElementwiseMax) {
      merged = merge_max(ptrs, &max_cache_);
    } else {
      merged = merge_conv->forward(concat_channels(ptrs), train);
      merged = merge_relu_.forward(merged, train);
    }
    return head.forward(merged, train);
  }

  std::array<Tensor<T>, 3> backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = head.backward(grad_logits);
    std::array<Tensor<T>, 3> branch_grads;
    if (config.merge == MergeKind::ElementwiseMax) {
      branch_grads = merge_max_backward(g, max_cache_);
    } else {
      g = merge_relu_.backward(g);
      branch_grads = split_channels(merge_conv->backward(g));
    }
    std::array<Tensor<T>, 3> view_grads;
    for (std::size_t v = 0; v < 3; ++v) view_grads[v] = branches[v].backward(branch_grads[v]);
    return view_grads;
  }

  /// Parameters grouped for the optimizer. A group's replicas must stay
  /// bitwise identical: the step sums the grads and writes the same update
  /// to every replica. Independent configurations yield one replica per
  /// group.
  struct TiedGroup {
    std::vector<Tensor<T>*> replicas;
    std::vector<const Tensor<T>*> grads;
  };

  std::vector<TiedGroup> param_groups() {
    std::vector<TiedGroup> groups;
    std::array<std::vector<Tensor<T>*>, 3> p = {branches[0].params(), branches[1].params(),
                                                branches[2].params()};
    std::array<std::vector<Tensor<T>*>, 3> g = {branches[0].grads(), branches[1].grads(),
                                                branches[2].grads()};
    if (config.shared) {
      for (std::size_t j = 0; j < p[0].size(); ++j) {
        groups.push_back({{p[0][j], p[1][j], p[2][j]}, {g[0][j], g[1][j], g[2][j]}});
      }
    } else {
      for (std::size_t v = 0; v < 3; ++v) {
        for (std::size_t j = 0; j < p[v].size(); ++j) {
          groups.push_back({{p[v][j]}, {g[v][j]}});
        }
      }
    }
    if (merge_conv) {
      groups.push_back({{&merge_conv->weight}, {&merge_conv->grad_weight}});
      groups.push_back({{&merge_conv->bias}, {&merge_conv->grad_bias}});
    }
    auto hp = head.params();
    auto hg = head.grads();
    for (std::size_t j = 0; j < hp.size(); ++j) groups.push_back({{hp[j]}, {hg[j]}});
    return groups;
  }

  /// Full serializable state in a canonical walk order: branches (all three,
  /// even when shared), merge conv, head.
  std::vector<Tensor<T>*> state() {
    std::vector<Tensor<T>*> out;
    for (auto& b : branches) {
      for (auto* t : b.state()) out.push_back(t);
    }
    if (merge_conv) {
      out.push_back(&merge_conv->weight);
      out.push_back(&merge_conv->bias);
    }
    for (auto* t : head.state()) out.push_back(t);
    return out;
  }

 private:
  MaxMergeCache max_cache_;
  ReLU<T> merge_relu_;
};

namespace detail {

template <typename T>
void build_branch(Sequential<T>& branch, const MultiViewConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t in = config.k;
  for (int block = 0; block < 3; ++block) {
    auto& conv = branch.template add<Conv2D<T>>(in, config.conv_channels, 3, 3, 1, 1, false);
    conv.init(rng);
    branch.template add<BatchNorm2D<T>>(config.conv_channels);
    branch.template add<ReLU<T>>();
    branch.template add<MaxPool2x2<T>>();
    in = config.conv_channels;
  }
}

}  // namespace detail

/// Assembles one of the three merge designs. Independent branches draw their
/// weights from seed, seed+1, seed+2; shared branches all draw from seed so
/// the replicas start identical.
template <typename T>
MultiViewNetwork<T> build_multiview_net(const MultiViewConfig& config, std::uint64_t seed) {
  config.validate();
  MultiViewNetwork<T> net;
  net.config = config;
  for (std::size_t v = 0; v < 3; ++v) {
    detail::build_branch(net.branches[v], config, config.shared ? seed : seed + v);
  }
  if (config.merge == MergeKind::ConcatConv) {
    net.merge_conv = std::make_unique<Conv2D<T>>(3 * config.conv_channels, config.conv_channels,
                                                 3, 3, 1, 1);
    Rng rng(seed + 3);
    net.merge_conv->init(rng);
  }
  const std::size_t spatial = config.n / 8;
  Rng head_rng(seed + 4);
  net.head.template add<Flatten<T>>();
  auto& fc1 = net.head.template add<Linear<T>>(config.conv_channels * spatial * spatial,
                                               config.fc_width);
  fc1.init(head_rng);
  net.head.template add<ReLU<T>>();
  auto& fc2 = net.head.template add<Linear<T>>(config.fc_width, config.classes);
  fc2.init(head_rng);
  return net;
}

/// One SGD step over the tied parameter groups: grads of a group are summed
/// in branch order and the identical update is applied to every replica.
template <typename T>
void multiview_sgd_step(MultiViewNetwork<T>& net, SgdOptimizer<T>& optimizer, int epoch) {
  auto groups = net.param_groups();
  std::vector<Tensor<T>> summed;
  summed.reserve(groups.size());
  std::vector<Tensor<T>*> masters;
  std::vector<const Tensor<T>*> grads;
  for (auto& group : groups) {
    masters.push_back(group.replicas[0]);
    if (group.grads.size() == 1) {
      grads.push_back(group.grads[0]);
    } else {
      Tensor<T> sum = *group.grads[0];
      for (std::size_t i = 1; i < group.grads.size(); ++i) {
        require_same_shape(sum, *group.grads[i], "tied gradient");
        for (std::size_t j = 0; j < sum.numel(); ++j) sum[j] += (*group.grads[i])[j];
      }
      summed.push_back(std::move(sum));
      grads.push_back(&summed.back());
    }
  }
  optimizer.step(masters, grads, epoch);
  for (auto& group : groups) {
    for (std::size_t r = 1; r < group.replicas.size(); ++r) {
      group.replicas[r]->data = group.replicas[0]->data;
    }
  }
}

/// Converts one descriptor to a [1, k, n, n] activation: channel = layer,
/// row = grid q, column = grid p. The 1.2 sentinel passes through as an
/// ordinary value.
template <typename T>
Tensor<T> descriptor_to_tensor(const MLHDescriptor& desc) {
  Tensor<T> out({1, desc.k, desc.n, desc.n});
  for (std::uint32_t p = 0; p < desc.n; ++p) {
    for (std::uint32_t q = 0; q < desc.n; ++q) {
      for (std::uint32_t layer = 0; layer < desc.k; ++layer) {
        out.at4(0, layer, q, p) = static_cast<T>(desc.at(p, q, layer));
      }
    }
  }
  return out;
}

template <typename T>
std::array<Tensor<T>, 3> bundle_to_views(const MultiViewBundle& bundle) {
  return {descriptor_to_tensor<T>(bundle.views[0]), descriptor_to_tensor<T>(bundle.views[1]),
          descriptor_to_tensor<T>(bundle.views[2])};
}

/// Class logits for one bundle.
template <typename T>
Tensor<T> forward_multiview(MultiViewNetwork<T>& net, const MultiViewBundle& bundle) {
  if (bundle.views[0].k != net.config.k || bundle.views[0].n != net.config.n) {
    throw ShapeMismatch("bundle (n, k) does not match the network input");
  }
  return net.forward(bundle_to_views<T>(bundle), false);
}

}  // namespace mlh
