#include "pad/binio.hpp"

#include <cstdio>
#include <fstream>

namespace pad {
namespace fs = std::filesystem;

void ByteWriter::commit(const fs::path& path) const {
  fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out) fail(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

ByteReader ByteReader::from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return ByteReader(std::move(data));
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  ByteWriter w;
  w.raw(text.data(), text.size());
  w.commit(path);
}

}  // namespace pad
