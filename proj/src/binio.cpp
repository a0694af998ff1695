#include "binio.hpp"

#include <fstream>
#include <iterator>

#include "hatepipe/rng.hpp"

namespace hatepipe::detail {

namespace {
std::uint64_t checksum(std::span<const std::uint8_t> bytes) {
  return hash64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), 0x48505346);
}
}  // namespace

std::vector<std::uint8_t> frame(std::string_view magic, std::uint32_t version, std::span<const std::uint8_t> payload) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(magic.data()), magic.size()));
  w.u32(version);
  w.u64(payload.size());
  w.raw(payload);
  w.u64(checksum(w.bytes()));
  return std::move(w.bytes());
}

std::span<const std::uint8_t> unframe(std::span<const std::uint8_t> bytes, std::string_view magic,
                                      std::uint32_t version, std::string_view what) {
  using R = FormatError::Reason;
  const std::string name(what);
  const std::size_t header = magic.size() + 12;
  if (bytes.size() < magic.size() ||
      std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw FormatError(R::bad_magic, name + ": not a " + name + " file (bad magic)");
  if (bytes.size() < header) throw FormatError(R::truncated, name + ": truncated header");
  ByteReader r(bytes.subspan(magic.size()));
  const auto got_version = r.u32();
  if (got_version != version)
    throw FormatError(R::version_mismatch, name + ": unsupported version " + std::to_string(got_version) +
                                               " (expected " + std::to_string(version) + ")");
  const auto length = r.u64();
  if (length > bytes.size() || bytes.size() - header < length + 8)
    throw FormatError(R::truncated, name + ": truncated (payload declares " + std::to_string(length) + " bytes)");
  if (bytes.size() - header > length + 8) throw FormatError(R::malformed, name + ": trailing bytes after checksum");
  ByteReader tail(bytes.subspan(header + length));
  if (tail.u64() != checksum(bytes.first(header + length)))
    throw FormatError(R::checksum_mismatch, name + ": checksum mismatch");
  return bytes.subspan(header, length);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ModelError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hatepipe::detail
