#include "gaildrive/nn/checkpoint.hpp"

namespace gaildrive::nn {

namespace {

void write_spec(ByteWriter& w, const LayerSpec& s) {
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.i32(s.in);
  w.i32(s.out);
  w.i32(s.height);
  w.i32(s.width);
  w.i32(s.first);
  w.i32(s.count);
  w.i32(s.side_width);
  w.f32(s.slope);
}

LayerSpec read_spec(ByteReader& r) {
  LayerSpec s;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(LayerKind::kConcat)) {
    throw FormatError("unknown layer kind " + std::to_string(kind));
  }
  s.kind = static_cast<LayerKind>(kind);
  s.in = r.i32();
  s.out = r.i32();
  s.height = r.i32();
  s.width = r.i32();
  s.first = r.i32();
  s.count = r.i32();
  s.side_width = r.i32();
  s.slope = r.f32();
  return s;
}

void read_header(ByteReader& r) {
  if (r.remaining() < 4 || r.raw(4) != std::string(kCheckpointMagic, 4)) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
}

std::vector<LayerSpec> read_table(ByteReader& r) {
  const auto n = r.u32();
  if (n > r.remaining()) throw FormatError("layer count exceeds stream");
  std::vector<LayerSpec> specs;
  specs.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) specs.push_back(read_spec(r));
  return specs;
}

}  // namespace

Bytes save_params(const Network& net) {
  const Network* one[] = {&net};
  return save_params(one);
}

Bytes save_params(std::span<const Network* const> nets) {
  ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic, 4));
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(nets.size()));
  for (const Network* net : nets) {
    w.u32(static_cast<std::uint32_t>(net->layers().size()));
    for (const auto& s : net->layers()) write_spec(w, s);
    for (std::size_t i = 0; i < net->layers().size(); ++i) {
      auto p = net->params(i);
      w.u32(static_cast<std::uint32_t>(p.size()));
      for (float v : p) w.f32(v);
    }
  }
  return std::move(w).take();
}

void load_params(Network& net, std::span<const std::uint8_t> bytes) {
  Network* one[] = {&net};
  load_params(one, bytes);
}

void load_params(std::span<Network* const> nets, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r);
  const auto count = r.u32();
  if (count != nets.size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " networks, expected " +
                      std::to_string(nets.size()));
  }
  // Parse everything before touching the destination networks.
  std::vector<std::vector<std::vector<float>>> staged(nets.size());
  for (std::size_t n = 0; n < nets.size(); ++n) {
    const auto specs = read_table(r);
    if (specs != nets[n]->layers()) {
      throw FormatError("checkpoint layer table does not match network " + std::to_string(n));
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto len = r.u32();
      if (len != nets[n]->params(i).size()) {
        throw FormatError("parameter count mismatch in layer " + std::to_string(i));
      }
      if (static_cast<std::size_t>(len) * 4 > r.remaining()) {
        throw FormatError("truncated parameter block");
      }
      std::vector<float> block(len);
      for (auto& v : block) v = r.f32();
      staged[n].push_back(std::move(block));
    }
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint");
  for (std::size_t n = 0; n < nets.size(); ++n) {
    for (std::size_t i = 0; i < staged[n].size(); ++i) {
      auto dst = nets[n]->params(i);
      std::copy(staged[n][i].begin(), staged[n][i].end(), dst.begin());
    }
    nets[n]->zero_grad();
    nets[n]->clear_cache();
  }
}

std::vector<std::vector<LayerSpec>> read_layer_tables(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r);
  const auto count = r.u32();
  std::vector<std::vector<LayerSpec>> tables;
  for (std::uint32_t n = 0; n < count; ++n) {
    tables.push_back(read_table(r));
    for (const auto& s : tables.back()) {
      const auto len = r.u32();
      if (len != layer_param_count(s)) throw FormatError("parameter count mismatch");
      if (static_cast<std::size_t>(len) * 4 > r.remaining()) {
        throw FormatError("truncated parameter block");
      }
      for (std::uint32_t k = 0; k < len; ++k) r.f32();
    }
  }
  return tables;
}

}  // namespace gaildrive::nn
