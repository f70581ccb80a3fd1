// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssiu/model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace ssiu::model {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'I', 'U', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

uint64_t fnv1a(const char* data, size_t n) {
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= uint64_t(uint8_t(data[i]));
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(const std::string& buf, size_t& off) {
  if (off + sizeof(T) > buf.size()) throw io_error("checkpoint truncated");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(SSIUModel<float>& model, const std::string& path) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put(buf, kVersion);

  std::string cfg = model.config().to_json().dump();
  put(buf, uint64_t(cfg.size()));
  buf.append(cfg);

  auto refs = model.parameters();
  put(buf, uint64_t(refs.size()));
  for (auto& [name, p] : refs) {
    put(buf, uint64_t(name.size()));
    buf.append(name);
    Shape4 s = p->value.shape();
    put(buf, int32_t(s.n));
    put(buf, int32_t(s.c));
    put(buf, int32_t(s.h));
    put(buf, int32_t(s.w));
    buf.append(reinterpret_cast<const char*>(p->value.data()),
               p->value.numel() * sizeof(float));
  }
  put(buf, fnv1a(buf.data(), buf.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open checkpoint for writing: " + path);
  f.write(buf.data(), std::streamsize(buf.size()));
  if (!f) throw io_error("short write while saving checkpoint: " + path);
}

namespace {

std::string read_and_verify(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open checkpoint: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + sizeof(uint32_t) + sizeof(uint64_t))
    throw io_error("checkpoint too small: " + path);
  if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw io_error("checkpoint integrity failure (bad magic): " + path);
  uint64_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - sizeof(uint64_t), sizeof(uint64_t));
  uint64_t actual = fnv1a(buf.data(), buf.size() - sizeof(uint64_t));
  if (stored != actual)
    throw io_error("checkpoint integrity failure (checksum mismatch): " + path);
  return buf;
}

}  // namespace

SSIUConfig peek_checkpoint_config(const std::string& path) {
  std::string buf = read_and_verify(path);
  size_t off = sizeof(kMagic);
  uint32_t version = take<uint32_t>(buf, off);
  if (version != kVersion) throw io_error("unsupported checkpoint version");
  uint64_t cfg_len = take<uint64_t>(buf, off);
  if (off + cfg_len > buf.size()) throw io_error("checkpoint truncated");
  std::string cfg = buf.substr(off, cfg_len);
  return SSIUConfig::from_json(nlohmann::json::parse(cfg));
}

SSIUModel<float> load_checkpoint(const std::string& path) {
  std::string buf = read_and_verify(path);
  size_t off = sizeof(kMagic);
  uint32_t version = take<uint32_t>(buf, off);
  if (version != kVersion) throw io_error("unsupported checkpoint version");
  uint64_t cfg_len = take<uint64_t>(buf, off);
  if (off + cfg_len > buf.size()) throw io_error("checkpoint truncated");
  SSIUConfig cfg = SSIUConfig::from_json(nlohmann::json::parse(buf.substr(off, cfg_len)));
  off += cfg_len;

  SSIUModel<float> model(cfg);
  auto refs = model.parameters();
  std::map<std::string, nn::Param<float>*> by_name;
  for (auto& [name, p] : refs) by_name[name] = p;

  uint64_t n = take<uint64_t>(buf, off);
  if (n != refs.size()) throw io_error("checkpoint parameter count mismatch");
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t name_len = take<uint64_t>(buf, off);
    if (off + name_len > buf.size()) throw io_error("checkpoint truncated");
    std::string name = buf.substr(off, name_len);
    off += name_len;
    int32_t dn = take<int32_t>(buf, off);
    int32_t dc = take<int32_t>(buf, off);
    int32_t dh = take<int32_t>(buf, off);
    int32_t dw = take<int32_t>(buf, off);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw io_error("checkpoint has unknown parameter '" + name + "'");
    Shape4 s = it->second->value.shape();
    if (s.n != dn || s.c != dc || s.h != dh || s.w != dw)
      throw io_error("checkpoint shape mismatch for '" + name + "'");
    size_t bytes = it->second->value.numel() * sizeof(float);
    if (off + bytes > buf.size()) throw io_error("checkpoint truncated");
    std::memcpy(it->second->value.data(), buf.data() + off, bytes);
    off += bytes;
  }
  return model;
}

}  // namespace ssiu::model
