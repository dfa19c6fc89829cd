#include "pad/checkpoint.hpp"

#include <sstream>

namespace pad {

namespace detail {

std::map<std::string, std::string> parse_echo_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<int> parse_echo_list(const std::string& value) {
  std::string body = value;
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']')
    body = body.substr(1, body.size() - 2);
  std::vector<int> out;
  std::istringstream ls(body);
  std::string item;
  while (std::getline(ls, item, ',')) out.push_back(std::stoi(item));
  return out;
}

void read_ckpt_header(ByteReader& r, const std::filesystem::path& path, CheckpointMeta* meta,
                      int* scalar_bytes, std::uint32_t* tensors) {
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kCkptMagic, 4) != 0)
    fail(ErrorKind::data, path.string() + ": not a checkpoint file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kCkptVersion)
    fail(ErrorKind::data,
         path.string() + ": unsupported checkpoint version " + std::to_string(version));
  meta->kind = r.str();
  meta->config = r.str();
  *scalar_bytes = r.u8();
  if (*scalar_bytes != 4 && *scalar_bytes != 8)
    fail(ErrorKind::data, path.string() + ": bad scalar width");
  *tensors = r.u32();
}
}  // namespace detail

CheckpointMeta peek_checkpoint(const std::filesystem::path& path) {
  ByteReader r = ByteReader::from_file(path);
  CheckpointMeta meta;
  int scalar_bytes = 0;
  std::uint32_t tensors = 0;
  detail::read_ckpt_header(r, path, &meta, &scalar_bytes, &tensors);
  return meta;
}

}  // namespace pad
