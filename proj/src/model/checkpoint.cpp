#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "propnet/error.hpp"
#include "propnet/model.hpp"

namespace propnet {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'R', 'O', 'P', 'N', 'E', 'T', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(std::string data, std::string origin) : data_(std::move(data)), origin_(std::move(origin)) {}

  const char* take(std::size_t n) {
    if (pos_ + n > data_.size()) throw InputError("checkpoint " + origin_ + " is truncated");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint64_t u64() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(8));
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::uint32_t u32() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(4));
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    return std::string(take(n), n);
  }
  bool done() const { return pos_ == data_.size(); }
  const std::string& origin() const { return origin_; }

 private:
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string out(kMagic.begin(), kMagic.end());
  put_u32(out, kVersion);
  put_string(out, ckpt.spec.to_text());
  put_string(out, ckpt.vocab_ref);
  put_u32(out, static_cast<std::uint32_t>(ckpt.parameters.size()));
  for (const auto& [name, t] : ckpt.parameters) {
    put_string(out, name);
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write checkpoint " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  Reader r(buf.str(), path.string());
  if (std::memcmp(r.take(kMagic.size()), kMagic.data(), kMagic.size()) != 0) {
    throw InputError(path.string() + " is not a checkpoint file");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw InputError("checkpoint " + path.string() + " has unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.spec = ModelSpec::from_text(r.str());
  ckpt.vocab_ref = r.str();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) throw InputError("checkpoint parameter '" + name + "' has bad rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = std::bit_cast<double>(r.u64());
    ckpt.parameters.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw InputError("checkpoint " + path.string() + " has trailing bytes");
  return ckpt;
}

}  // namespace propnet
