#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "latentplan/encoder.hpp"
#include "latentplan/error.hpp"

namespace lp::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'L', 'P', 'C', 'K'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& buf, std::size_t end, std::string path)
      : buf_(buf), end_(end), path_(std::move(path)) {}

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > end_) fail("truncated");
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    if (pos_ + n > end_) fail("truncated string");
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kIo, "checkpoint " + path_ + ": " + msg);
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::vector<char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string path_;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelWeights& weights) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(weights.config().to_text());
  w.str(vocabulary_text());
  const auto& tensors = weights.layout().tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    w.str(t.name);
    w.u32(2);
    w.u32(static_cast<std::uint32_t>(t.rows));
    w.u32(static_cast<std::uint32_t>(t.cols));
    w.bytes(weights.values().data() + t.offset, t.size() * sizeof(float));
  }
  std::uint32_t crc = crc_of(w.buffer().data(), w.buffer().size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path);
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  out.write(reinterpret_cast<const char*>(&crc), 4);
  if (!out) throw Error(ErrorCode::kIo, "failed writing checkpoint " + path);
}

ModelWeights load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read checkpoint " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw Error(ErrorCode::kIo, "checkpoint " + path + ": truncated");

  std::uint32_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  Reader r(buf, buf.size() - 4, path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("not a checkpoint file");
  std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    r.fail("unsupported format version " + std::to_string(version));
  if (crc_of(buf.data(), buf.size() - 4) != stored) r.fail("checksum mismatch");

  EncoderConfig config = EncoderConfig::from_text(r.str());
  if (r.str() != vocabulary_text()) r.fail("vocabulary differs from this build's table");

  ModelWeights weights(config);
  const auto& tensors = weights.layout().tensors();
  std::uint32_t count = r.u32();
  if (count != tensors.size()) r.fail("tensor count does not match config");
  for (const auto& t : tensors) {
    if (r.str() != t.name) r.fail("unexpected tensor, wanted " + t.name);
    if (r.u32() != 2) r.fail("tensor " + t.name + " is not 2-d");
    std::uint32_t rows = r.u32(), cols = r.u32();
    if (rows != static_cast<std::uint32_t>(t.rows) || cols != static_cast<std::uint32_t>(t.cols))
      r.fail("tensor " + t.name + " has the wrong shape");
    r.bytes(weights.values().data() + t.offset, t.size() * sizeof(float));
  }
  if (!r.done()) r.fail("trailing bytes");
  if (!weights.all_finite()) r.fail("non-finite parameter values");
  return weights;
}

}  // namespace lp::nn
