#include "adaptms/model/params.hpp"

#include "adaptms/data/corpus.hpp"
#include "adaptms/util/hash.hpp"
#include "adaptms/util/rng.hpp"

#include <cstring>
#include <stdexcept>

namespace adaptms::model {

void ModelDims::validate() const {
  auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw std::invalid_argument(std::string("model.") + field + " must be positive");
  };
  positive(text_dim, "text_dim");
  positive(proj_dim, "proj_dim");
  positive(behavior_hidden, "behavior_hidden");
  positive(fusion_hidden, "fusion_hidden");
  positive(disc_hidden, "disc_hidden");
  if (num_platforms < 2) throw std::invalid_argument("model.num_platforms must be at least 2");
}

ModelParams ModelParams::init(const ModelDims& dims, const ModelOptions& options, std::uint64_t seed) {
  dims.validate();
  using nn::Activation;
  util::Rng rng(util::derive_seed(seed, 0x1a17));
  ModelParams p;
  p.dims = dims;
  p.options = options;
  p.text_proj = nn::DenseLayer::init(dims.text_dim, dims.proj_dim, Activation::identity, rng);
  p.behavior_in = nn::DenseLayer::init(data::kBehaviorDim, dims.behavior_hidden, Activation::relu, rng);
  p.behavior_bn1 = nn::BatchNormState::init(dims.behavior_hidden);
  p.behavior_mid = nn::DenseLayer::init(dims.behavior_hidden, dims.behavior_hidden, Activation::relu, rng);
  p.behavior_bn2 = nn::BatchNormState::init(dims.behavior_hidden);
  p.behavior_out = nn::DenseLayer::init(dims.behavior_hidden, dims.proj_dim, Activation::identity, rng);

  const double gate_bound = 1.0 / std::sqrt(static_cast<double>(dims.proj_dim + 1));
  p.gate_weight.resize(dims.proj_dim + 1);
  for (double& w : p.gate_weight) w = rng.uniform(-gate_bound, gate_bound);
  p.gate_bias = {rng.uniform(-gate_bound, gate_bound)};

  p.head_hidden = nn::DenseLayer::init(dims.fused_dim(), dims.fusion_hidden, Activation::relu, rng);
  p.head_out = nn::DenseLayer::init(dims.fusion_hidden, 1, Activation::identity, rng);
  p.disc_hidden = nn::DenseLayer::init(dims.fused_dim(), dims.disc_hidden, Activation::relu, rng);
  p.disc_out = nn::DenseLayer::init(dims.disc_hidden, dims.num_platforms, Activation::identity, rng);
  p.calib = calib::CalibrationParams::identity(dims.num_platforms);
  return p;
}

ModelParams ModelParams::zeros(const ModelDims& dims, const ModelOptions& options) {
  dims.validate();
  using nn::Activation;
  ModelParams p;
  p.dims = dims;
  p.options = options;
  p.text_proj = nn::DenseLayer::zeros(dims.text_dim, dims.proj_dim, Activation::identity);
  p.behavior_in = nn::DenseLayer::zeros(data::kBehaviorDim, dims.behavior_hidden, Activation::relu);
  p.behavior_bn1 = nn::BatchNormState::init(dims.behavior_hidden);
  p.behavior_mid = nn::DenseLayer::zeros(dims.behavior_hidden, dims.behavior_hidden, Activation::relu);
  p.behavior_bn2 = nn::BatchNormState::init(dims.behavior_hidden);
  p.behavior_out = nn::DenseLayer::zeros(dims.behavior_hidden, dims.proj_dim, Activation::identity);
  p.gate_weight.assign(dims.proj_dim + 1, 0.0);
  p.gate_bias = {0.0};
  p.head_hidden = nn::DenseLayer::zeros(dims.fused_dim(), dims.fusion_hidden, Activation::relu);
  p.head_out = nn::DenseLayer::zeros(dims.fusion_hidden, 1, Activation::identity);
  p.disc_hidden = nn::DenseLayer::zeros(dims.fused_dim(), dims.disc_hidden, Activation::relu);
  p.disc_out = nn::DenseLayer::zeros(dims.disc_hidden, dims.num_platforms, Activation::identity);
  p.calib.pairs.assign(dims.num_platforms, {0.0, 0.0});
  for (auto* bn : {&p.behavior_bn1, &p.behavior_bn2}) {
    std::fill(bn->gamma.begin(), bn->gamma.end(), 0.0);
    std::fill(bn->running_var.begin(), bn->running_var.end(), 0.0);
  }
  return p;
}

namespace {

template <class View, class Self>
std::vector<View> collect(Self& p, bool with_running) {
  std::vector<View> out;
  auto dense = [&](const std::string& name, auto& layer) {
    out.push_back({name + ".weight", layer.weight.values()});
    out.push_back({name + ".bias", std::span(layer.bias)});
  };
  auto bn = [&](const std::string& name, auto& state) {
    out.push_back({name + ".gamma", std::span(state.gamma)});
    out.push_back({name + ".beta", std::span(state.beta)});
  };
  dense("text_proj", p.text_proj);
  dense("behavior.in", p.behavior_in);
  bn("behavior.bn1", p.behavior_bn1);
  dense("behavior.mid", p.behavior_mid);
  bn("behavior.bn2", p.behavior_bn2);
  dense("behavior.out", p.behavior_out);
  out.push_back({"gate.weight", std::span(p.gate_weight)});
  out.push_back({"gate.bias", std::span(p.gate_bias)});
  dense("head.hidden", p.head_hidden);
  dense("head.out", p.head_out);
  dense("disc.hidden", p.disc_hidden);
  dense("disc.out", p.disc_out);
  for (std::size_t k = 0; k < p.calib.pairs.size(); ++k) {
    out.push_back({calib_block_name(static_cast<int>(k)), std::span(p.calib.pairs[k])});
  }
  if (with_running) {
    for (auto [name, state] : {std::pair{"behavior.bn1", &p.behavior_bn1},
                               std::pair{"behavior.bn2", &p.behavior_bn2}}) {
      out.push_back({std::string(name) + ".running_mean", std::span(state->running_mean)});
      out.push_back({std::string(name) + ".running_var", std::span(state->running_var)});
    }
  }
  return out;
}

}  // namespace

std::vector<ParamView> ModelParams::trainable() { return collect<ParamView>(*this, false); }
std::vector<ConstParamView> ModelParams::trainable() const {
  return collect<ConstParamView>(*this, false);
}
std::vector<ParamView> ModelParams::state() { return collect<ParamView>(*this, true); }
std::vector<ConstParamView> ModelParams::state() const { return collect<ConstParamView>(*this, true); }

std::string calib_block_name(int platform) { return "calib." + std::to_string(platform); }

BlockGroup block_group(std::string_view name) {
  if (name.ends_with(".running_mean") || name.ends_with(".running_var")) return BlockGroup::running_stat;
  if (name.starts_with("calib.")) return BlockGroup::calibration;
  if (name.starts_with("disc.")) return BlockGroup::discriminator;
  if (name.starts_with("head.")) return BlockGroup::head;
  if (name.starts_with("text_proj.") || name.starts_with("behavior.") || name.starts_with("gate.")) {
    return BlockGroup::encoder;
  }
  throw std::invalid_argument("unknown parameter block: " + std::string(name));
}

std::string params_fingerprint(const ModelParams& params,
                               const std::function<bool(std::string_view)>& filter) {
  std::string bytes;
  for (const auto& view : params.state()) {
    if (filter && !filter(view.name)) continue;
    bytes += view.name;
    bytes += '\0';
    const std::size_t offset = bytes.size();
    bytes.resize(offset + view.values.size_bytes());
    std::memcpy(bytes.data() + offset, view.values.data(), view.values.size_bytes());
  }
  return util::fingerprint(bytes);
}

std::string params_fingerprint(const ModelParams& params) { return params_fingerprint(params, {}); }

}  // namespace adaptms::model
