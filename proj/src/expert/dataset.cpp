#include "gaildrive/expert/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include <json.hpp>

#include "gaildrive/common/error.hpp"

namespace gaildrive::expert {

Dataset::Dataset(DatasetManifest manifest) : manifest_(std::move(manifest)) {
  manifest_.samples = 0;
  manifest_.boundaries = {0};
}

std::size_t Dataset::input_width() const {
  return manifest_.obs_dim + (manifest_.raster ? sim::kRasterDim : 0);
}

std::span<const float> Dataset::input(std::size_t i) const {
  return std::span<const float>(records_).subspan(i * record_width(), input_width());
}

sim::Action Dataset::action(std::size_t i) const {
  const float* a = records_.data() + i * record_width() + input_width();
  return {a[0], a[1]};
}

void Dataset::add(const sim::Observation& obs, const sim::Action& action) {
  const auto c = obs.continuous();
  records_.insert(records_.end(), c.begin(), c.end());
  if (manifest_.raster) {
    if (obs.raster.size() != sim::kRasterDim) throw StateError("raster dataset needs raster observations");
    records_.insert(records_.end(), obs.raster.begin(), obs.raster.end());
  }
  const auto a = action.clamped();
  records_.push_back(static_cast<float>(a.steer));
  records_.push_back(static_cast<float>(a.throttle));
  ++manifest_.samples;
}

void Dataset::end_trajectory() {
  if (manifest_.boundaries.back() != manifest_.samples) manifest_.boundaries.push_back(manifest_.samples);
}

Bytes encode_dataset(const Dataset& d) {
  const auto& m = d.manifest();
  nlohmann::json j = {{"route", m.route},       {"samples", m.samples}, {"obs_dim", m.obs_dim},
                      {"act_dim", m.act_dim},   {"raster", m.raster},   {"rate_hz", m.rate_hz},
                      {"boundaries", m.boundaries}};
  const std::string text = j.dump();
  ByteWriter w;
  w.raw(std::string_view(kDatasetMagic, 4));
  w.u16(kDatasetVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text);
  for (float v : d.records()) w.f32(v);
  return std::move(w).take();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.raw(4) != std::string_view(kDatasetMagic, 4)) throw FormatError("not a dataset (bad magic)");
  const auto version = r.u16();
  if (version != kDatasetVersion) throw FormatError("unsupported dataset version " + std::to_string(version));
  const auto len = r.u32();
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(r.raw(len));
    m.route = j.at("route").get<std::string>();
    m.samples = j.at("samples").get<std::size_t>();
    m.obs_dim = j.at("obs_dim").get<std::size_t>();
    m.act_dim = j.at("act_dim").get<std::size_t>();
    m.raster = j.at("raster").get<bool>();
    m.rate_hz = j.at("rate_hz").get<double>();
    m.boundaries = j.at("boundaries").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad dataset manifest: ") + e.what());
  }
  if (m.obs_dim != sim::kContinuousDim || m.act_dim != sim::kActionDim) {
    throw FormatError("dataset dims do not match the observation layout");
  }
  if (m.boundaries.empty() || m.boundaries.front() != 0 || m.boundaries.back() != m.samples ||
      !std::is_sorted(m.boundaries.begin(), m.boundaries.end())) {
    throw FormatError("dataset trajectory boundaries do not partition the samples");
  }
  Dataset d(m);
  const std::size_t width = d.record_width();
  if (r.remaining() != m.samples * width * 4) throw FormatError("dataset record block has the wrong length");
  std::vector<float> values(m.samples * width);
  for (auto& v : values) v = r.f32();
  // Rebuild through add() so the sample count and boundaries are re-derived.
  for (std::size_t t = 0; t + 1 < m.boundaries.size(); ++t) {
    for (std::size_t i = m.boundaries[t]; i < m.boundaries[t + 1]; ++i) {
      const float* rec = values.data() + i * width;
      sim::Observation o;
      o.speed = rec[0];
      o.target = {rec[1], rec[2]};
      std::copy(rec + 3, rec + m.obs_dim, o.command_onehot.begin());
      if (m.raster) o.raster.assign(rec + m.obs_dim, rec + m.obs_dim + sim::kRasterDim);
      const float steer = rec[width - 2], throttle = rec[width - 1];
      if (!(steer >= -1.0f && steer <= 1.0f && throttle >= 0.0f && throttle <= 1.0f)) {
        throw FormatError("dataset action out of range at sample " + std::to_string(i));
      }
      d.add(o, {steer, throttle});
    }
    d.end_trajectory();
  }
  if (d.records() != values) throw FormatError("dataset records do not survive re-encoding");
  return d;
}

void write_dataset(const std::string& path, const Dataset& d) { write_file(path, encode_dataset(d)); }

Dataset read_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

Split split_samples(std::size_t n, std::uint64_t seed, double train_fraction) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0x73706c6974);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

Batch gather(const Dataset& d, std::span<const std::size_t> indices) {
  if (indices.empty()) throw StateError("cannot gather an empty batch");
  const std::size_t w = d.input_width();
  Batch b{nn::Tensor({indices.size(), w}), nn::Tensor({indices.size(), sim::kActionDim})};
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto in = d.input(indices[r]);
    std::copy(in.begin(), in.end(), b.inputs.row(r).begin());
    const auto a = d.action(indices[r]);
    b.actions(r, 0) = static_cast<float>(a.steer);
    b.actions(r, 1) = static_cast<float>(a.throttle);
  }
  return b;
}

Batch sample_batch(const Dataset& d, std::span<const std::size_t> indices, std::size_t m, Rng& rng) {
  if (indices.empty() || m == 0) throw StateError("cannot sample from an empty split");
  std::uniform_int_distribution<std::size_t> pick(0, indices.size() - 1);
  std::vector<std::size_t> chosen(m);
  for (auto& c : chosen) c = indices[pick(rng)];
  return gather(d, chosen);
}

}  // namespace gaildrive::expert
