// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "relc/error.hpp"

namespace relc {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw IoError("truncated checkpoint: " + path_);
  }
  const std::string& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

void append_tensor(std::string& out, const std::string& name, const Shape& shape,
                   const std::vector<double>& values) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  put_u32(out, static_cast<std::uint32_t>(shape.rank()));
  for (int i = 0; i < shape.rank(); ++i) put_u32(out, static_cast<std::uint32_t>(shape.dim(i)));
  for (double v : values) put_f64(out, v);
}

}  // namespace

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string manifest_text(const TrainMeta& meta) {
  std::ostringstream os;
  os.precision(17);
  os << "step=" << meta.step << "\n";
  os << "loss_ema=" << meta.loss_ema << "\n";
  os << "seed=" << meta.seed << "\n";
  os << "init=" << meta.init_scheme << "\n";
  os << "config_hash=" << meta.config_hash << "\n";
  return os.str();
}

namespace {

TrainMeta parse_manifest(const std::string& text, const std::string& path) {
  TrainMeta meta;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("bad manifest line in " + path + ": " + line);
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "step")
      meta.step = std::stoll(val);
    else if (key == "loss_ema")
      meta.loss_ema = std::stod(val);
    else if (key == "seed")
      meta.seed = std::stoull(val);
    else if (key == "init")
      meta.init_scheme = val;
    else if (key == "config_hash")
      meta.config_hash = val;
    // unknown keys are tolerated for forward compatibility
  }
  return meta;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store, const TrainMeta& meta) {
  std::string out(kMagic, sizeof(kMagic));
  const auto& names = store.names();
  put_u32(out, static_cast<std::uint32_t>(names.size() * 3));
  for (const auto& name : names) {
    const ParamTensor& p = store.at(name);
    append_tensor(out, name, p.shape, p.value);
  }
  for (const auto& name : names) append_tensor(out, "adam.m." + name, store.at(name).shape,
                                               store.at(name).m);
  for (const auto& name : names) append_tensor(out, "adam.v." + name, store.at(name).shape,
                                               store.at(name).v);
  const std::string manifest = manifest_text(meta);
  put_u32(out, static_cast<std::uint32_t>(manifest.size()));
  out.append(manifest);
  put_u64(out, fnv1a64(reinterpret_cast<const unsigned char*>(out.data()), out.size()));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp + " -> " + path + " (" + ec.message() + ")");
}

TrainMeta load_checkpoint(const std::string& path, ParamStore& store) {
  if (!store.names().empty()) throw std::invalid_argument("load_checkpoint: store must be empty");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < sizeof(kMagic) + 8) throw IoError("truncated checkpoint: " + path);
  if (buf.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0)
    throw IoError("bad checkpoint magic: " + path);
  const std::size_t body = buf.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[body + i])) << (8 * i);
  const std::uint64_t actual = fnv1a64(reinterpret_cast<const unsigned char*>(buf.data()), body);
  if (stored != actual) throw IoError("checkpoint checksum mismatch: " + path);

  Reader r(buf, path);
  r.bytes(sizeof(kMagic));
  const std::uint32_t n_tensors = r.u32();
  struct Entry {
    std::string name;
    Shape shape;
    std::vector<double> values;
  };
  std::vector<Entry> entries;
  entries.reserve(n_tensors);
  for (std::uint32_t t = 0; t < n_tensors; ++t) {
    Entry e;
    e.name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 3) throw IoError("bad tensor rank in checkpoint: " + path);
    std::vector<int> dims(rank);
    for (auto& d : dims) d = static_cast<int>(r.u32());
    e.shape = Shape(dims);
    e.values.resize(static_cast<std::size_t>(e.shape.numel()));
    for (auto& v : e.values) v = r.f64();
    entries.push_back(std::move(e));
  }
  const std::string manifest = r.bytes(r.u32());
  if (r.pos() != body) throw IoError("trailing bytes in checkpoint: " + path);

  for (auto& e : entries) {
    if (e.name.rfind("adam.m.", 0) == 0) {
      store.at(e.name.substr(7)).m = std::move(e.values);
    } else if (e.name.rfind("adam.v.", 0) == 0) {
      store.at(e.name.substr(7)).v = std::move(e.values);
    } else {
      store.add(e.name, e.shape, std::move(e.values));
    }
  }
  return parse_manifest(manifest, path);
}

}  // namespace relc
