#include "tactile/gan/checkpoint.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tactile/error.hpp"

namespace tactile::gan {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host byte order and assumes little-endian");

namespace {

constexpr char kMagic[8] = {'T', 'M', 'A', 'P', 'C', 'K', 'P', 'T'};

template <typename V>
void put(std::string& out, V v) {
  char buf[sizeof(V)];
  std::memcpy(buf, &v, sizeof(V));
  out.append(buf, sizeof(V));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename V>
  V get() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void read_into(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Checkpoint, "checkpoint is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedArray& Checkpoint::array(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw Error(ErrorKind::Checkpoint, "checkpoint has no array named '" + name + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, 0);
  put<std::int64_t>(out, ckpt.timestamp);
  const std::string meta = ckpt.meta.dump();
  put<std::uint64_t>(out, meta.size());
  out += meta;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.name.size()));
    out += a.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.dims.size()));
    for (int d : a.dims) put<std::int32_t>(out, d);
    put<std::uint64_t>(out, a.values.size());
    out.append(reinterpret_cast<const char*>(a.values.data()), a.values.size() * sizeof(float));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.take(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorKind::Checkpoint, "not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version == 0 || version > kCheckpointVersion) {
    throw Error(ErrorKind::Checkpoint,
                "unsupported checkpoint version " + std::to_string(version));
  }
  r.get<std::uint32_t>();
  Checkpoint ckpt;
  ckpt.timestamp = r.get<std::int64_t>();
  const auto meta_len = r.get<std::uint64_t>();
  try {
    ckpt.meta = nlohmann::json::parse(r.take(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Checkpoint, std::string("checkpoint metadata: ") + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  ckpt.arrays.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedArray a;
    a.name = r.take(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    std::uint64_t expected = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      a.dims.push_back(r.get<std::int32_t>());
      expected *= static_cast<std::uint64_t>(std::max(a.dims.back(), 0));
    }
    const auto n = r.get<std::uint64_t>();
    if (n != expected) {
      throw Error(ErrorKind::Checkpoint, "array '" + a.name + "' size does not match its dims");
    }
    a.values.resize(n);
    r.read_into(a.values.data(), n * sizeof(float));
    ckpt.arrays.push_back(std::move(a));
  }
  if (!r.done()) throw Error(ErrorKind::Checkpoint, "trailing bytes after checkpoint arrays");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, Checkpoint ckpt) {
  if (ckpt.timestamp == 0) {
    ckpt.timestamp = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  }
  const std::string bytes = serialize_checkpoint(ckpt);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorKind::Io, "cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

NamedArray to_named_array(const nn::Parameter<float>& p, bool gradient) {
  return {p.name, p.dims, gradient ? p.grad : p.value};
}

void assign(nn::Parameter<float>& p, const NamedArray& a) {
  if (a.name != p.name) {
    throw Error(ErrorKind::Checkpoint, "array '" + a.name + "' cannot fill parameter '" + p.name + "'");
  }
  if (a.dims != p.dims || a.values.size() != p.value.size()) {
    throw Error(ErrorKind::Checkpoint, "array '" + a.name + "' does not match parameter '" +
                                           p.name + "' shape");
  }
  p.value = a.values;
}

}  // namespace tactile::gan
