// .padc checkpoints: a kind tag, a config echo, and named parameter tensors.
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pad/binio.hpp"
#include "pad/nn/param.hpp"

namespace pad {

struct CheckpointMeta {
  std::string kind;
  std::string config;  // key=value lines describing the saved model
};

// kind + config without reading tensors.
CheckpointMeta peek_checkpoint(const std::filesystem::path& path);

namespace detail {
inline constexpr char kCkptMagic[4] = {'P', 'A', 'D', 'C'};
inline constexpr std::uint16_t kCkptVersion = 1;
void read_ckpt_header(ByteReader& r, const std::filesystem::path& path, CheckpointMeta* meta,
                      int* scalar_bytes, std::uint32_t* tensors);
// Splits a config echo into trimmed key -> value pairs (one "key = value" per
// line, later keys win).
std::map<std::string, std::string> parse_echo_kv(const std::string& text);
std::vector<int> parse_echo_list(const std::string& value);
}  // namespace detail

template <typename S>
void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::string& config, const nn::ParamStore<S>& ps) {
  ByteWriter w;
  w.raw(detail::kCkptMagic, 4);
  w.u16(detail::kCkptVersion);
  w.str(kind);
  w.str(config);
  w.u8(static_cast<std::uint8_t>(sizeof(S)));
  w.u32(static_cast<std::uint32_t>(ps.items.size()));
  for (const auto& p : ps.items) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->value.rows()));
    w.u32(static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        if constexpr (sizeof(S) == 4)
          w.f32(static_cast<float>(p->value(r, c)));
        else
          w.f64(static_cast<double>(p->value(r, c)));
      }
  }
  w.commit(path);
}

// Overwrites the values of an already-built store; every stored tensor must
// match an existing parameter of the same shape, and none may be missing.
template <typename S>
CheckpointMeta load_checkpoint(const std::filesystem::path& path, const std::string& expect_kind,
                               nn::ParamStore<S>& ps) {
  ByteReader r = ByteReader::from_file(path);
  CheckpointMeta meta;
  int scalar_bytes = 0;
  std::uint32_t tensors = 0;
  detail::read_ckpt_header(r, path, &meta, &scalar_bytes, &tensors);
  if (!expect_kind.empty() && meta.kind != expect_kind)
    fail(ErrorKind::data,
         path.string() + ": checkpoint kind '" + meta.kind + "', expected '" + expect_kind + "'");
  if (scalar_bytes != static_cast<int>(sizeof(S)))
    fail(ErrorKind::data, path.string() + ": checkpoint scalar width " +
                              std::to_string(scalar_bytes * 8) + " bits does not match the model");
  if (tensors != ps.items.size())
    fail(ErrorKind::data, path.string() + ": checkpoint holds " + std::to_string(tensors) +
                              " tensors, model has " + std::to_string(ps.items.size()));
  for (std::uint32_t i = 0; i < tensors; ++i) {
    const std::string name = r.str();
    const std::uint32_t rows = r.u32(), cols = r.u32();
    nn::Parameter<S>* p = ps.find(name);
    if (!p) fail(ErrorKind::data, path.string() + ": unexpected tensor '" + name + "'");
    if (p->value.rows() != static_cast<Eigen::Index>(rows) ||
        p->value.cols() != static_cast<Eigen::Index>(cols))
      fail(ErrorKind::data, path.string() + ": shape mismatch for tensor '" + name + "'");
    for (std::uint32_t rr = 0; rr < rows; ++rr)
      for (std::uint32_t cc = 0; cc < cols; ++cc) {
        if constexpr (sizeof(S) == 4)
          p->value(rr, cc) = static_cast<S>(r.f32());
        else
          p->value(rr, cc) = static_cast<S>(r.f64());
      }
  }
  if (!r.at_end()) fail(ErrorKind::data, path.string() + ": trailing bytes after tensors");
  return meta;
}

}  // namespace pad
