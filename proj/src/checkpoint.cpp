#include "checkpoint.hpp"

#include <cstdio>
#include <cstring>

namespace isodiff {

namespace {

constexpr char kMagic[8] = {'I', 'S', 'O', 'D', 'I', 'F', 'F', '1'};

void put_u16(std::vector<unsigned char>& buf, std::uint16_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<unsigned char>& buf, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof(v));
  put_u64(buf, v);
}

struct Reader {
  const unsigned char* p;
  std::size_t len;
  std::size_t pos = 0;

  void need(std::size_t k) const {
    if (pos + k > len) throw IoError("checkpoint: truncated file");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p[pos] | (p[pos + 1] << 8));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, sizeof(d));
    return d;
  }
};

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
  static std::uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void Checkpoint::put(const std::string& name, Tensor value) {
  for (const auto& [n, v] : arrays_) {
    if (n == name) throw IoError("checkpoint: duplicate array name: " + name);
  }
  arrays_.emplace_back(name, std::move(value));
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, v] : arrays_) {
    if (n == name) return v;
  }
  throw IoError("checkpoint: missing array: " + name);
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, v] : arrays_) {
    if (n == name) return true;
  }
  return false;
}

void Checkpoint::save(const std::string& path) const {
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  put_u16(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(arrays_.size()));
  for (const auto& [name, value] : arrays_) {
    if (name.size() > 0xFFFF) throw IoError("checkpoint: array name too long");
    put_u16(buf, static_cast<std::uint16_t>(name.size()));
    buf.insert(buf.end(), name.begin(), name.end());
    buf.push_back(static_cast<unsigned char>(value.rank()));
    for (std::size_t d : value.shape()) put_u64(buf, d);
    for (std::size_t i = 0; i < value.size(); ++i) put_f64(buf, value[i]);
  }
  put_u32(buf, crc32(buf.data(), buf.size()));

  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw IoError("checkpoint: cannot open for write: " + tmp);
  const std::size_t written = std::fwrite(buf.data(), 1, buf.size(), f);
  const int closed = std::fclose(f);
  if (written != buf.size() || closed != 0) {
    std::remove(tmp.c_str());
    throw IoError("checkpoint: short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("checkpoint: rename failed: " + path);
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("checkpoint: cannot open: " + path);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  if (size < 0) {
    std::fclose(f);
    throw IoError("checkpoint: cannot stat: " + path);
  }
  std::vector<unsigned char> buf(static_cast<std::size_t>(size));
  const std::size_t got = std::fread(buf.data(), 1, buf.size(), f);
  std::fclose(f);
  if (got != buf.size()) throw IoError("checkpoint: short read: " + path);

  if (buf.size() < 8 + 2 + 4 + 4) throw IoError("checkpoint: file too small");
  if (std::memcmp(buf.data(), kMagic, 8) != 0) throw IoError("checkpoint: bad magic");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(buf[buf.size() - 4]) |
      (static_cast<std::uint32_t>(buf[buf.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(buf[buf.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(buf[buf.size() - 1]) << 24);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc) {
    throw IoError("checkpoint: CRC mismatch (corrupt file)");
  }

  Reader r{buf.data(), buf.size() - 4, 8};
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw IoError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    r.need(name_len);
    std::string name(reinterpret_cast<const char*>(buf.data() + r.pos), name_len);
    r.pos += name_len;
    r.need(1);
    const unsigned rank = buf[r.pos++];
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (unsigned d = 0; d < rank; ++d) {
      const std::uint64_t dim = r.u64();
      shape.push_back(static_cast<std::size_t>(dim));
      total *= static_cast<std::size_t>(dim);
    }
    std::vector<double> data(total);
    for (std::size_t k = 0; k < total; ++k) data[k] = r.f64();
    ck.put(name, Tensor(std::move(shape), std::move(data)));
  }
  return ck;
}

}  // namespace isodiff
