#include "cbaa/distributed.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "cbaa/ip_mapping.hpp"

namespace cbaa {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'A', '1'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
  std::vector<std::byte>& out() { return out_; }

 private:
  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  template <typename T>
  T le(const char* field) {
    need(sizeof(T), field);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(std::to_integer<unsigned>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::byte> take(std::size_t n, const char* field) {
    need(n, field);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (in_.size() - pos_ < n)
      throw ParseError(field, "truncated header: need " + std::to_string(n) + " bytes at offset " +
                                  std::to_string(pos_) + ", have " + std::to_string(in_.size() - pos_));
  }

  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

std::uint64_t payload_bytes(const SketchConfig& c) { return (c.totalBits() + 7) / 8; }

SketchConfig parse_header(Reader& in) {
  auto magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw ParseError("magic", "expected \"CBA1\"");
  const auto version = in.le<std::uint16_t>("version");
  if (version != kSketchFileVersion)
    throw ParseError("version", "unsupported version " + std::to_string(version));

  SketchConfig c;
  c.r = in.le<std::uint8_t>("r");
  c.numRa = in.le<std::uint8_t>("numRa");
  c.numVa = in.le<std::uint8_t>("numVa");
  c.g = in.le<std::uint32_t>("g");
  c.cbn.resize(c.arrayCount());
  for (auto& v : c.cbn) v = in.le<std::uint8_t>("cbn");
  c.clbs.resize(c.numRa);
  for (auto& v : c.clbs) v = in.le<std::uint8_t>("clbs");
  c.mangleA = in.le<std::uint32_t>("mangleA");
  c.mangleB = in.le<std::uint32_t>("mangleB");
  c.bvSeed = in.le<std::uint32_t>("bvSeed");
  c.vaSeeds.resize(c.numVa);
  for (auto& v : c.vaSeeds) v = in.le<std::uint32_t>("vaSeeds");

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ParseError("config", e.what());
  }
  return c;
}

}  // namespace

std::vector<std::byte> serialize(const CubeOfBitsArrays& cube) {
  const SketchConfig& c = cube.config();
  Writer w;
  w.bytes(kMagic, 4);
  w.le<std::uint16_t>(kSketchFileVersion);
  w.le<std::uint8_t>(static_cast<std::uint8_t>(c.r));
  w.le<std::uint8_t>(static_cast<std::uint8_t>(c.numRa));
  w.le<std::uint8_t>(static_cast<std::uint8_t>(c.numVa));
  w.le<std::uint32_t>(c.g);
  for (unsigned v : c.cbn) w.le<std::uint8_t>(static_cast<std::uint8_t>(v));
  for (unsigned v : c.clbs) w.le<std::uint8_t>(static_cast<std::uint8_t>(v));
  w.le<std::uint32_t>(c.mangleA);
  w.le<std::uint32_t>(c.mangleB);
  w.le<std::uint32_t>(c.bvSeed);
  for (std::uint32_t s : c.vaSeeds) w.le<std::uint32_t>(s);

  const std::uint64_t n = payload_bytes(c);
  w.le<std::uint64_t>(n);
  auto& out = w.out();
  const std::size_t start = out.size();
  out.resize(start + n);
  const auto words = cube.words();
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + start, words.data(), n);
  } else {
    for (std::uint64_t i = 0; i < n; ++i)
      out[start + i] = static_cast<std::byte>((words[i / 8] >> (8 * (i % 8))) & 0xFF);
  }
  return std::move(out);
}

SketchConfig read_config(std::span<const std::byte> bytes) {
  Reader in(bytes);
  return parse_header(in);
}

CubeOfBitsArrays deserialize(std::span<const std::byte> bytes) {
  Reader in(bytes);
  CubeOfBitsArrays cube(parse_header(in));
  const std::uint64_t expected = payload_bytes(cube.config());
  const auto declared = in.le<std::uint64_t>("payload length");
  if (declared != expected)
    throw ParseError("payload length", "header declares " + std::to_string(declared) + " bytes, config implies " +
                                           std::to_string(expected));
  if (in.remaining() != expected)
    throw ParseError("payload", "expected " + std::to_string(expected) + " bytes, got " +
                                    std::to_string(in.remaining()));
  auto payload = in.take(expected, "payload");
  auto words = cube.mutable_words();
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(words.data(), payload.data(), expected);
  } else {
    for (std::uint64_t i = 0; i < expected; ++i)
      words[i / 8] |= static_cast<std::uint64_t>(std::to_integer<unsigned>(payload[i])) << (8 * (i % 8));
  }
  return cube;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw std::runtime_error("short read on " + path.string());
  return bytes;
}

void write_sketch_file(const std::filesystem::path& path, const CubeOfBitsArrays& cube) {
  const auto bytes = serialize(cube);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

CubeOfBitsArrays read_sketch_file(const std::filesystem::path& path) { return deserialize(read_file_bytes(path)); }

std::optional<PartitionMode> parse_partition_mode(const std::string& name) {
  if (name == "hash-by-pair") return PartitionMode::HashByPair;
  if (name == "hash-by-inner") return PartitionMode::HashByInner;
  if (name == "round-robin") return PartitionMode::RoundRobin;
  return std::nullopt;
}

const char* to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::HashByPair:
      return "hash-by-pair";
    case PartitionMode::HashByInner:
      return "hash-by-inner";
    case PartitionMode::RoundRobin:
      return "round-robin";
  }
  return "?";
}

unsigned route_pair(IpPair pair, std::size_t position, const PartitionPolicy& policy) {
  const unsigned n = std::max(policy.routerCount, 1u);
  switch (policy.mode) {
    case PartitionMode::HashByPair:
      return mix32(pair.iip ^ mix32(pair.oip + 0x9E3779B9u)) % n;
    case PartitionMode::HashByInner:
      return mix32(pair.iip) % n;
    case PartitionMode::RoundRobin:
      return static_cast<unsigned>(position % n);
  }
  return 0;
}

std::vector<std::vector<IpPair>> partition_trace(std::span<const IpPair> pairs, const PartitionPolicy& policy) {
  std::vector<std::vector<IpPair>> out(std::max(policy.routerCount, 1u));
  for (std::size_t i = 0; i < pairs.size(); ++i) out[route_pair(pairs[i], i, policy)].push_back(pairs[i]);
  return out;
}

void GlobalMerger::add(std::span<const std::byte> file, const std::string& label) {
  if (cube_) {
    const SketchConfig incoming = read_config(file);
    if (!(incoming == cube_->config()))
      throw MergeError("config mismatch between '" + firstLabel_ + "' and '" + label + "': field '" +
                       first_config_difference(cube_->config(), incoming) + "' differs");
  }
  add(deserialize(file), label);
}

void GlobalMerger::add(CubeOfBitsArrays cube, const std::string& label) {
  if (!cube_) {
    cube_.emplace(std::move(cube));
    firstLabel_ = label;
    return;
  }
  if (!(cube.config() == cube_->config()))
    throw MergeError("config mismatch between '" + firstLabel_ + "' and '" + label + "': field '" +
                     first_config_difference(cube_->config(), cube.config()) + "' differs");
  cube_->merge_from(cube);
}

CubeOfBitsArrays GlobalMerger::take() {
  if (!cube_) throw std::logic_error("global merge needs at least one sketch");
  CubeOfBitsArrays out = std::move(*cube_);
  cube_.reset();
  return out;
}

CubeOfBitsArrays global_merge(std::span<const std::vector<std::byte>> files) {
  GlobalMerger merger;
  for (std::size_t i = 0; i < files.size(); ++i) merger.add(files[i], "file #" + std::to_string(i));
  return merger.take();
}

}  // namespace cbaa
