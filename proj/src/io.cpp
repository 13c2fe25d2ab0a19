// Copyright 2026 The pcx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pcx/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace pcx::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary containers are read and written with memcpy on little-endian hosts");

enum class Scalar { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

std::size_t ScalarSize(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUint8: return 1;
    case Scalar::kInt16:
    case Scalar::kUint16: return 2;
    case Scalar::kInt32:
    case Scalar::kUint32:
    case Scalar::kFloat32: return 4;
    case Scalar::kFloat64: return 8;
  }
  return 0;
}

bool ParseScalar(std::string_view name, Scalar& out) {
  static const std::pair<std::string_view, Scalar> kNames[] = {
      {"char", Scalar::kInt8},     {"int8", Scalar::kInt8},      {"uchar", Scalar::kUint8},
      {"uint8", Scalar::kUint8},   {"short", Scalar::kInt16},    {"int16", Scalar::kInt16},
      {"ushort", Scalar::kUint16}, {"uint16", Scalar::kUint16},  {"int", Scalar::kInt32},
      {"int32", Scalar::kInt32},   {"uint", Scalar::kUint32},    {"uint32", Scalar::kUint32},
      {"float", Scalar::kFloat32}, {"float32", Scalar::kFloat32}, {"double", Scalar::kFloat64},
      {"float64", Scalar::kFloat64}};
  for (const auto& [n, s] : kNames) {
    if (n == name) {
      out = s;
      return true;
    }
  }
  return false;
}

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUint8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

[[noreturn]] void Malformed(const std::string& why) {
  throw Error(ErrorCode::kMalformedHeader, "PLY header: " + why);
}

std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double DecodeBinary(const char* p, Scalar s) {
  switch (s) {
    case Scalar::kInt8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
    case Scalar::kUint8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
    case Scalar::kInt16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
    case Scalar::kUint16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
    case Scalar::kInt32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
    case Scalar::kUint32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
    case Scalar::kFloat32: { float v; std::memcpy(&v, p, 4); return v; }
    case Scalar::kFloat64: { double v; std::memcpy(&v, p, 8); return v; }
  }
  return 0.0;
}

double ParseAscii(std::string_view token, Scalar s) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  std::from_chars_result r{};
  double value = 0.0;
  if (s == Scalar::kFloat32) {
    float f = 0.0f;
    r = std::from_chars(first, last, f);
    value = f;
  } else if (s == Scalar::kFloat64) {
    r = std::from_chars(first, last, value);
  } else {
    long long i = 0;
    r = std::from_chars(first, last, i);
    value = static_cast<double>(i);
  }
  if (r.ec != std::errc() || r.ptr != last) {
    throw Error(ErrorCode::kMalformedHeader, "PLY body: bad value '" + std::string(token) + "'");
  }
  return value;
}

template <typename T>
void AppendRaw(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
void AppendText(std::string& out, T value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, r.ptr);
}

}  // namespace

PlyData ParsePly(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size()) Malformed("missing end_header");
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) Malformed("missing end_header");
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  if (next_line() != "ply") Malformed("missing 'ply' magic");
  std::optional<PlyEncoding> encoding;
  std::vector<Element> elements;
  for (;;) {
    const std::string_view line = next_line();
    const auto tok = Tokens(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) Malformed("bad format line");
      if (tok[1] == "ascii") {
        encoding = PlyEncoding::kAscii;
      } else if (tok[1] == "binary_little_endian") {
        encoding = PlyEncoding::kBinaryLittleEndian;
      } else if (tok[1] == "binary_big_endian") {
        throw Error(ErrorCode::kUnsupportedEncoding, "big-endian PLY is not supported");
      } else {
        Malformed("unknown format '" + std::string(tok[1]) + "'");
      }
    } else if (tok[0] == "element") {
      if (tok.size() != 3) Malformed("bad element line");
      Element e;
      e.name = tok[1];
      const auto r = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (r.ec != std::errc()) Malformed("bad element count");
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) Malformed("property before element");
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        if (!ParseScalar(tok[2], p.count_type) || !ParseScalar(tok[3], p.type)) {
          Malformed("bad list property types");
        }
        p.name = tok[4];
      } else if (tok.size() == 3) {
        if (!ParseScalar(tok[1], p.type)) Malformed("unknown type '" + std::string(tok[1]) + "'");
        p.name = tok[2];
      } else {
        Malformed("bad property line");
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      Malformed("unexpected keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!encoding) Malformed("missing format line");

  const Element* vertex = nullptr;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
  }
  if (!vertex) throw Error(ErrorCode::kMissingRequiredProperty, "PLY has no vertex element");

  auto find = [&](std::string_view name) -> int {
    for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
      if (vertex->properties[i].name == name && !vertex->properties[i].is_list) {
        return static_cast<int>(i);
      }
    }
    return -1;
  };
  const int ix = find("x"), iy = find("y"), iz = find("z");
  const int ir = find("red"), ig = find("green"), ib = find("blue");
  for (auto [idx, name] : {std::pair{ix, "x"}, {iy, "y"}, {iz, "z"}, {ir, "red"}, {ig, "green"},
                           {ib, "blue"}}) {
    if (idx < 0) {
      throw Error(ErrorCode::kMissingRequiredProperty,
                  std::string("PLY vertex lacks property '") + name + "'");
    }
  }
  const int inx = find("nx"), iny = find("ny"), inz = find("nz");
  const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
  const int ilabel = find("label"), icluster = find("cluster");

  PlyData data;
  data.layout.encoding = *encoding;
  data.layout.position_type = vertex->properties[static_cast<std::size_t>(ix)].type == Scalar::kFloat64
                                  ? PositionType::kFloat64
                                  : PositionType::kFloat32;
  PointCloud& cloud = data.cloud;
  const std::size_t n = vertex->count;
  cloud.positions.resize(n);
  cloud.colors.resize(n);
  if (has_normals) cloud.normals.emplace(n);
  if (ilabel >= 0) cloud.labels.emplace(n);
  if (icluster >= 0) cloud.clusters.emplace(n);

  std::vector<double> row;
  auto store = [&](std::size_t i) {
    auto at = [&](int idx) { return row[static_cast<std::size_t>(idx)]; };
    cloud.positions[i] = Vec3(at(ix), at(iy), at(iz));
    cloud.colors[i] = {static_cast<std::uint8_t>(at(ir)), static_cast<std::uint8_t>(at(ig)),
                       static_cast<std::uint8_t>(at(ib))};
    if (has_normals) (*cloud.normals)[i] = Vec3(at(inx), at(iny), at(inz));
    if (ilabel >= 0) (*cloud.labels)[i] = static_cast<std::int32_t>(at(ilabel));
    if (icluster >= 0) (*cloud.clusters)[i] = static_cast<std::int32_t>(at(icluster));
  };

  auto truncated = [] { return Error(ErrorCode::kMalformedHeader, "PLY body is truncated"); };

  if (*encoding == PlyEncoding::kBinaryLittleEndian) {
    for (const auto& e : elements) {
      const bool is_vertex = &e == vertex;
      row.assign(e.properties.size(), 0.0);
      for (std::size_t i = 0; i < e.count; ++i) {
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.is_list) {
            if (pos + ScalarSize(p.count_type) > bytes.size()) throw truncated();
            const auto len = static_cast<std::size_t>(DecodeBinary(bytes.data() + pos, p.count_type));
            pos += ScalarSize(p.count_type) + len * ScalarSize(p.type);
            continue;
          }
          if (pos + ScalarSize(p.type) > bytes.size()) throw truncated();
          row[k] = DecodeBinary(bytes.data() + pos, p.type);
          pos += ScalarSize(p.type);
        }
        if (is_vertex) store(i);
      }
      if (is_vertex) break;
    }
  } else {
    for (const auto& e : elements) {
      const bool is_vertex = &e == vertex;
      for (std::size_t i = 0; i < e.count; ++i) {
        std::string_view line;
        do {
          if (pos >= bytes.size()) throw truncated();
          std::size_t nl = bytes.find('\n', pos);
          if (nl == std::string_view::npos) nl = bytes.size();
          line = bytes.substr(pos, nl - pos);
          pos = nl + 1;
        } while (Tokens(line).empty());
        if (!is_vertex) continue;
        const auto tok = Tokens(line);
        row.assign(e.properties.size(), 0.0);
        std::size_t t = 0;
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (t >= tok.size()) throw truncated();
          if (p.is_list) {
            t += 1 + static_cast<std::size_t>(ParseAscii(tok[t], p.count_type));
            continue;
          }
          row[k] = ParseAscii(tok[t++], p.type);
        }
        store(i);
      }
      if (is_vertex) break;
    }
  }
  return data;
}

PlyData ReadPlyFile(const std::filesystem::path& path) {
  PlyData data = ParsePly(ReadFileBytes(path));
  data.cloud.scene_id = path.stem().string();
  return data;
}

std::string FormatPly(const PointCloud& cloud, const PlyLayout& layout) {
  cloud.Validate();
  const bool f64 = layout.position_type == PositionType::kFloat64;
  const bool binary = layout.encoding == PlyEncoding::kBinaryLittleEndian;
  const char* real = f64 ? "double" : "float";

  std::string out;
  out += "ply\nformat ";
  out += binary ? "binary_little_endian" : "ascii";
  out += " 1.0\ncomment pcx\nelement vertex " + std::to_string(cloud.size()) + "\n";
  for (const char* axis : {"x", "y", "z"}) out += std::string("property ") + real + " " + axis + "\n";
  if (cloud.normals) {
    for (const char* axis : {"nx", "ny", "nz"}) out += std::string("property ") + real + " " + axis + "\n";
  }
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.labels) out += "property int label\n";
  if (cloud.clusters) out += "property int cluster\n";
  out += "end_header\n";

  auto put_real = [&](double v) {
    if (binary) {
      f64 ? AppendRaw(out, v) : AppendRaw(out, static_cast<float>(v));
    } else {
      out += ' ';
      f64 ? AppendText(out, v) : AppendText(out, static_cast<float>(v));
    }
  };
  auto put_int = [&](auto v) {
    if (binary) {
      AppendRaw(out, v);
    } else {
      out += ' ';
      AppendText(out, static_cast<long long>(v));
    }
  };

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::size_t line_start = out.size();
    for (int k = 0; k < 3; ++k) put_real(cloud.positions[i][k]);
    if (cloud.normals) {
      for (int k = 0; k < 3; ++k) put_real((*cloud.normals)[i][k]);
    }
    for (auto c : cloud.colors[i]) put_int(c);
    if (cloud.labels) put_int((*cloud.labels)[i]);
    if (cloud.clusters) put_int((*cloud.clusters)[i]);
    if (!binary) {
      out.erase(line_start, 1);  // leading separator
      out += '\n';
    }
  }
  return out;
}

void WritePly(const PointCloud& cloud, const std::filesystem::path& path, const PlyLayout& layout) {
  WriteFileAtomic(path, FormatPly(cloud, layout));
}

namespace {

std::string Header(std::string_view kind, std::uint32_t rows, std::uint32_t cols) {
  std::string out = "PCX1";
  out += kind;
  AppendRaw(out, rows);
  AppendRaw(out, cols);
  return out;
}

struct Container {
  std::string kind;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::string bytes;  // whole file

  const char* payload() const { return bytes.data() + kHeaderBytes; }
};

Container ReadContainer(const std::filesystem::path& path) {
  Container c;
  c.bytes = ReadFileBytes(path);
  if (c.bytes.size() < kHeaderBytes || c.bytes.compare(0, 4, "PCX1") != 0) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": not a PCX1 container");
  }
  c.kind = c.bytes.substr(4, 4);
  std::memcpy(&c.rows, c.bytes.data() + 8, 4);
  std::memcpy(&c.cols, c.bytes.data() + 12, 4);
  return c;
}

void ExpectPayload(const Container& c, std::size_t bytes, const std::filesystem::path& path) {
  if (c.bytes.size() != kHeaderBytes + bytes) {
    throw Error(ErrorCode::kMalformedHeader,
                path.string() + ": payload size does not match header dimensions");
  }
}

void ExpectKind(const Container& c, std::string_view kind, const std::filesystem::path& path) {
  if (c.kind != kind) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": expected a " + std::string(kind) +
                                                 " container, found " + c.kind);
  }
}

std::uint32_t Checked32(std::size_t n) {
  if (n > UINT32_MAX) throw Error(ErrorCode::kInvalidArgument, "array too large for PCX1 header");
  return static_cast<std::uint32_t>(n);
}

template <typename T>
std::string Int32Container(std::string_view kind, const std::vector<T>& values) {
  std::string out = Header(kind, Checked32(values.size()), 1);
  out.reserve(kHeaderBytes + 4 * values.size());
  for (T v : values) AppendRaw(out, static_cast<std::int32_t>(v));
  return out;
}

std::vector<std::int32_t> Int32Payload(const Container& c, const std::filesystem::path& path) {
  if (c.cols != 1) throw Error(ErrorCode::kMalformedHeader, path.string() + ": expected one column");
  ExpectPayload(c, 4ull * c.rows, path);
  std::vector<std::int32_t> out(c.rows);
  if (c.rows > 0) std::memcpy(out.data(), c.payload(), 4ull * c.rows);
  return out;
}

std::string FloatMatrixPayload(const Matrix& m) {
  std::string out;
  out.reserve(4 * static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) AppendRaw(out, static_cast<float>(m(i, j)));
  }
  return out;
}

Matrix DecodeFloatMatrix(const char* p, std::uint32_t rows, std::uint32_t cols) {
  Matrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      float f;
      std::memcpy(&f, p, 4);
      p += 4;
      m(i, j) = f;
    }
  }
  return m;
}

}  // namespace

void WriteMask(const std::vector<std::uint8_t>& mask, const std::filesystem::path& path) {
  WriteFileAtomic(path, Int32Container(kMaskKind, mask));
}

std::vector<std::uint8_t> ReadMask(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  ExpectKind(c, kMaskKind, path);
  std::vector<std::uint8_t> out;
  for (auto v : Int32Payload(c, path)) {
    if (v != 0 && v != 1) throw Error(ErrorCode::kMalformedHeader, path.string() + ": mask value not 0/1");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

void WriteClusters(const std::vector<std::uint32_t>& cluster_of, const std::filesystem::path& path) {
  WriteFileAtomic(path, Int32Container(kClusterKind, cluster_of));
}

std::vector<std::uint32_t> ReadClusters(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  ExpectKind(c, kClusterKind, path);
  std::vector<std::uint32_t> out;
  for (auto v : Int32Payload(c, path)) {
    if (v < 0) throw Error(ErrorCode::kMalformedHeader, path.string() + ": negative cluster id");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

void WriteLabels(const std::vector<std::int32_t>& labels, const std::filesystem::path& path) {
  WriteFileAtomic(path, Int32Container(kLabelKind, labels));
}

std::vector<std::int32_t> ReadLabels(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  if (c.kind != kLabelKind && c.kind != kClusterKind && c.kind != kMaskKind) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": not an int32 array container");
  }
  return Int32Payload(c, path);
}

void WriteFeatures(const Matrix& features, const std::filesystem::path& path) {
  WriteFileAtomic(path, Header(kFeatureKind, Checked32(features.rows()), Checked32(features.cols())) +
                            FloatMatrixPayload(features));
}

Matrix ReadFeatures(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  ExpectKind(c, kFeatureKind, path);
  ExpectPayload(c, 4ull * c.rows * c.cols, path);
  return DecodeFloatMatrix(c.payload(), c.rows, c.cols);
}

void WriteBundle(const Matrix& features, const std::vector<std::uint32_t>& cluster_of,
                 const std::filesystem::path& path) {
  if (static_cast<std::size_t>(features.rows()) != cluster_of.size()) {
    throw Error(ErrorCode::kShapeMismatch, "bundle needs one cluster id per feature row");
  }
  std::string out = Header(kBundleKind, Checked32(features.rows()), Checked32(features.cols()));
  for (auto id : cluster_of) AppendRaw(out, static_cast<std::int32_t>(id));
  out += FloatMatrixPayload(features);
  WriteFileAtomic(path, out);
}

FeatureBundle ReadBundle(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  ExpectKind(c, kBundleKind, path);
  ExpectPayload(c, 4ull * c.rows + 4ull * c.rows * c.cols, path);
  std::vector<std::uint32_t> ids(c.rows);
  for (std::uint32_t i = 0; i < c.rows; ++i) {
    std::int32_t v;
    std::memcpy(&v, c.payload() + 4ull * i, 4);
    if (v < 0) throw Error(ErrorCode::kMalformedHeader, path.string() + ": negative cluster id");
    ids[i] = static_cast<std::uint32_t>(v);
  }
  return FeatureBundle::Build(DecodeFloatMatrix(c.payload() + 4ull * c.rows, c.rows, c.cols),
                              std::move(ids));
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(ErrorCode::kIo, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return std::move(ss).str();
}

}  // namespace pcx::io
