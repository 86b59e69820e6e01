#include "synsrl/tensor/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synsrl/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "archive payloads are written as raw little-endian words");

namespace synsrl::nn {

namespace {

std::string shape_field(const Shape& s) {
  if (s.empty()) return "1";
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(s[i]);
  }
  return out;
}

Shape parse_shape_field(const std::string& field, const std::string& path) {
  Shape s;
  std::stringstream ss(field);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      s.push_back(std::stoll(part));
    } catch (const std::exception&) {
      throw IoError(path + ": bad shape field '" + field + "'");
    }
  }
  if (s.empty()) throw IoError(path + ": empty shape field");
  return s;
}

}  // namespace

void Archive::put_f64(const std::string& name, Shape shape,
                      std::span<const double> values) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
    throw ShapeMismatch("archive entry " + name + ": shape " +
                        shape_str(shape) + " vs " +
                        std::to_string(values.size()) + " values");
  }
  f64_[name] = F64Entry{std::move(shape),
                        std::vector<double>(values.begin(), values.end())};
}

void Archive::put_u64(const std::string& name,
                      std::span<const uint64_t> values) {
  u64_[name] = U64Entry{std::vector<uint64_t>(values.begin(), values.end())};
}

bool Archive::has(const std::string& name) const {
  return f64_.count(name) > 0 || u64_.count(name) > 0;
}

const Archive::F64Entry& Archive::get_f64(const std::string& name) const {
  auto it = f64_.find(name);
  if (it == f64_.end()) throw IoError("archive: missing f64 entry " + name);
  return it->second;
}

const Archive::U64Entry& Archive::get_u64(const std::string& name) const {
  auto it = u64_.find(name);
  if (it == u64_.end()) throw IoError("archive: missing u64 entry " + name);
  return it->second;
}

std::vector<std::string> Archive::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : f64_) out.push_back(k);
  for (const auto& [k, v] : u64_) out.push_back(k);
  return out;
}

void Archive::save(const std::string& path) const {
  std::ostringstream manifest;
  manifest << "SYNSRL-ARCHIVE 1\n";
  uint64_t offset = 0;
  for (const auto& [name, e] : f64_) {
    manifest << name << ' ' << shape_field(e.shape) << " f64 " << offset
             << '\n';
    offset += e.values.size() * sizeof(double);
  }
  for (const auto& [name, e] : u64_) {
    manifest << name << ' ' << e.values.size() << " u64 " << offset << '\n';
    offset += e.values.size() * sizeof(uint64_t);
  }
  manifest << "DATA\n";

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    const std::string head = manifest.str();
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& [name, e] : f64_) {
      out.write(reinterpret_cast<const char*>(e.values.data()),
                static_cast<std::streamsize>(e.values.size() *
                                             sizeof(double)));
    }
    for (const auto& [name, e] : u64_) {
      out.write(reinterpret_cast<const char*>(e.values.data()),
                static_cast<std::streamsize>(e.values.size() *
                                             sizeof(uint64_t)));
    }
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

Archive Archive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || line != "SYNSRL-ARCHIVE 1") {
    throw IoError(path + ": not an archive file");
  }
  struct Row {
    std::string name;
    Shape shape;
    std::string dtype;
    uint64_t offset;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line == "DATA") break;
    std::istringstream ls(line);
    Row r;
    std::string shape_f, offset_f;
    if (!(ls >> r.name >> shape_f >> r.dtype >> offset_f)) {
      throw IoError(path + ": bad manifest line '" + line + "'");
    }
    r.shape = parse_shape_field(shape_f, path);
    r.offset = std::stoull(offset_f);
    rows.push_back(std::move(r));
  }
  if (line != "DATA") throw IoError(path + ": missing DATA marker");
  const std::streampos data_start = in.tellg();

  Archive a;
  for (const auto& r : rows) {
    const int64_t n = shape_numel(r.shape);
    in.seekg(data_start + static_cast<std::streamoff>(r.offset));
    if (r.dtype == "f64") {
      std::vector<double> v(static_cast<size_t>(n));
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
      if (!in) throw IoError(path + ": truncated payload for " + r.name);
      a.f64_[r.name] = F64Entry{r.shape, std::move(v)};
    } else if (r.dtype == "u64") {
      std::vector<uint64_t> v(static_cast<size_t>(n));
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(uint64_t)));
      if (!in) throw IoError(path + ": truncated payload for " + r.name);
      a.u64_[r.name] = U64Entry{std::move(v)};
    } else {
      throw IoError(path + ": unknown dtype " + r.dtype + " for " + r.name);
    }
  }
  return a;
}

}  // namespace synsrl::nn
