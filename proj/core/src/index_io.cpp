#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "relgrade/errors.hpp"
#include "relgrade/index.hpp"

namespace relgrade {

namespace {

constexpr char kMagic[4] = {'R', 'G', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "index file writer assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw ParseError("index file truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto len = read_raw<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError("index file truncated");
  return s;
}

}  // namespace

void HnswIndex::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_raw<std::uint32_t>(out, kVersion);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  write_raw<std::uint32_t>(out, params_.m);
  write_raw<std::uint32_t>(out, params_.ef_construction);
  write_raw<std::uint64_t>(out, params_.seed);
  write_raw<std::uint64_t>(out, insert_count_);
  write_raw<std::uint32_t>(out, entry_point_);
  write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(max_level_));
  write_raw<std::uint64_t>(out, nodes_.size());

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    write_string(out, nodes_[i].id);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(nodes_[i].level));
    out.write(reinterpret_cast<const char*>(vec(static_cast<std::uint32_t>(i))),
              static_cast<std::streamsize>(dim_ * sizeof(float)));
  }
  for (const Node& node : nodes_) {
    for (int layer = 0; layer <= node.level; ++layer) {
      const auto& list = node.neighbors[layer];
      write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
      out.write(reinterpret_cast<const char*>(list.data()),
                static_cast<std::streamsize>(list.size() * sizeof(std::uint32_t)));
    }
  }
  if (!out) throw IoError("failed writing index stream");
}

void HnswIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

HnswIndex HnswIndex::load(std::istream& in) {
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not an index file (bad magic)");
  }
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParseError("unsupported index file version " + std::to_string(version));
  }

  const auto dim = read_raw<std::uint32_t>(in);
  HnswParams params;
  params.m = read_raw<std::uint32_t>(in);
  params.ef_construction = read_raw<std::uint32_t>(in);
  params.seed = read_raw<std::uint64_t>(in);

  HnswIndex index(dim, params);
  index.insert_count_ = read_raw<std::uint64_t>(in);
  index.level_rng_.discard(index.insert_count_);
  index.entry_point_ = read_raw<std::uint32_t>(in);
  index.max_level_ = static_cast<int>(read_raw<std::uint32_t>(in));
  const auto node_count = read_raw<std::uint64_t>(in);

  index.nodes_.resize(node_count);
  index.vectors_.resize(node_count * dim);
  for (std::size_t i = 0; i < node_count; ++i) {
    Node& node = index.nodes_[i];
    node.id = read_string(in);
    node.level = static_cast<int>(read_raw<std::uint32_t>(in));
    in.read(reinterpret_cast<char*>(index.vectors_.data() + i * dim),
            static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw ParseError("index file truncated");
    if (!index.id_to_node_.emplace(node.id, static_cast<std::uint32_t>(i)).second) {
      throw ParseError("index file has duplicate doc_id " + node.id);
    }
    node.neighbors.resize(static_cast<std::size_t>(node.level) + 1);
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    Node& node = index.nodes_[i];
    for (int layer = 0; layer <= node.level; ++layer) {
      const auto degree = read_raw<std::uint32_t>(in);
      node.neighbors[layer].resize(degree);
      in.read(reinterpret_cast<char*>(node.neighbors[layer].data()),
              static_cast<std::streamsize>(degree * sizeof(std::uint32_t)));
      if (!in) throw ParseError("index file truncated");
    }
  }

  try {
    index.validate();
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("index file failed validation: ") + e.what());
  }
  return index;
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

}  // namespace relgrade
