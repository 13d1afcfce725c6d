#include "cranaug/nrrd.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cranaug {

static_assert(std::endian::native == std::endian::little, "NRRD I/O assumes a little-endian host");

std::string to_string(ScalarType t) {
  switch (t) {
    case ScalarType::uint8: return "uint8";
    case ScalarType::int16: return "int16";
    case ScalarType::float32: return "float";
  }
  return "?";
}

namespace {

std::size_t element_size(ScalarType t) {
  switch (t) {
    case ScalarType::uint8: return 1;
    case ScalarType::int16: return 2;
    case ScalarType::float32: return 4;
  }
  return 1;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

ScalarType parse_type(const std::string& raw) {
  std::string t = lower(trim(raw));
  if (t == "uchar" || t == "unsigned char" || t == "uint8" || t == "uint8_t") return ScalarType::uint8;
  if (t == "short" || t == "short int" || t == "signed short" || t == "signed short int" || t == "int16" ||
      t == "int16_t")
    return ScalarType::int16;
  if (t == "float") return ScalarType::float32;
  throw FormatError("NRRD field 'type': unsupported scalar type '" + raw + "'");
}

// "(1,0,0) (0,1,0) (0,0,1)" -> per-axis vector norms.
Spacing parse_space_directions(const std::string& value) {
  Spacing s{1.0, 1.0, 1.0};
  int axis = 0;
  std::size_t pos = 0;
  while (axis < 3) {
    std::size_t open = value.find('(', pos);
    if (open == std::string::npos) break;
    std::size_t close = value.find(')', open);
    if (close == std::string::npos) throw FormatError("NRRD field 'space directions': unbalanced parenthesis");
    std::string inner = value.substr(open + 1, close - open - 1);
    std::replace(inner.begin(), inner.end(), ',', ' ');
    std::istringstream in(inner);
    double sq = 0.0, c = 0.0;
    int n = 0;
    while (in >> c) {
      sq += c * c;
      ++n;
    }
    if (n == 0) throw FormatError("NRRD field 'space directions': empty vector");
    s[axis++] = std::sqrt(sq);
    pos = close + 1;
  }
  if (axis != 3) throw FormatError("NRRD field 'space directions': expected 3 vectors");
  return s;
}

std::string inflate_gzip(const std::string& compressed, std::size_t expected) {
  std::string out(expected, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("zlib inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = inflate(&zs, Z_FINISH);
  std::size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    if (produced < expected) {
      throw IoError("truncated gzip payload: got " + std::to_string(produced) + " of " +
                    std::to_string(expected) + " bytes");
    }
    throw IoError("gzip payload is corrupt or longer than declared sizes");
  }
  if (produced != expected) {
    throw IoError("truncated gzip payload: got " + std::to_string(produced) + " of " +
                  std::to_string(expected) + " bytes");
  }
  return out;
}

std::string deflate_gzip(const std::string& raw) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw IoError("zlib deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(raw.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  std::size_t produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw IoError("zlib deflate failed");
  out.resize(produced);
  return out;
}

std::string errno_message(const std::filesystem::path& path) {
  return path.string() + ": " + std::strerror(errno);
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + errno_message(path));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + errno_message(path));
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.empty()) throw IoError("empty output path");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + errno_message(tmp));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + errno_message(tmp));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

NrrdVolume read_nrrd(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= bytes.size()) return false;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) end = bytes.size();
    line = bytes.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = std::min(end + 1, bytes.size());
    return true;
  };

  std::string line;
  if (!next_line(line) || line.rfind("NRRD", 0) != 0) {
    throw FormatError(path.string() + ": missing NRRD magic");
  }
  std::map<std::string, std::string> fields;
  bool blank_seen = false;
  while (next_line(line)) {
    if (line.empty()) {
      blank_seen = true;
      break;
    }
    if (line[0] == '#') continue;
    if (line.find(":=") != std::string::npos) continue;  // key/value pairs
    std::size_t colon = line.find(": ");
    if (colon == std::string::npos) throw FormatError("NRRD header line without field separator: '" + line + "'");
    fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
  }
  if (!blank_seen) throw IoError(path.string() + ": header not terminated by a blank line");

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("NRRD field '" + key + "' is required");
    return it->second;
  };

  NrrdHeader h;
  if (trim(require("dimension")) != "3") {
    throw FormatError("NRRD field 'dimension': only 3 is supported, got " + fields["dimension"]);
  }
  h.type = parse_type(require("type"));
  {
    std::istringstream in(require("sizes"));
    std::int64_t s[3];
    for (auto& v : s) {
      if (!(in >> v) || v < 1) throw FormatError("NRRD field 'sizes': expected three positive integers");
    }
    std::string extra;
    if (in >> extra) throw FormatError("NRRD field 'sizes': more than three sizes");
    h.sizes = {s[0], s[1], s[2]};
  }
  {
    std::string enc = lower(require("encoding"));
    if (enc == "raw") {
      h.encoding = NrrdEncoding::raw;
    } else if (enc == "gzip" || enc == "gz") {
      h.encoding = NrrdEncoding::gzip;
    } else {
      throw FormatError("NRRD field 'encoding': unsupported encoding '" + enc + "'");
    }
  }
  if (auto it = fields.find("endian"); it != fields.end() && h.type != ScalarType::uint8) {
    if (lower(it->second) != "little") throw FormatError("NRRD field 'endian': only little is supported");
  }
  if (fields.count("data file") || fields.count("datafile")) {
    throw FormatError("NRRD field 'data file': detached data is not supported");
  }
  if (auto it = fields.find("space directions"); it != fields.end()) {
    h.spacing = parse_space_directions(it->second);
  } else if (auto sp = fields.find("spacings"); sp != fields.end()) {
    std::istringstream in(sp->second);
    for (int a = 0; a < 3; ++a) {
      std::string tok;
      if (!(in >> tok)) throw FormatError("NRRD field 'spacings': expected three values");
      double v = std::strtod(tok.c_str(), nullptr);
      h.spacing[a] = (std::isfinite(v) && v > 0.0) ? v : 1.0;  // "nan" means unknown
    }
  }

  const std::size_t count = h.sizes.count();
  const std::size_t nbytes = count * element_size(h.type);
  std::string payload = bytes.substr(pos);
  if (h.encoding == NrrdEncoding::gzip) {
    payload = inflate_gzip(payload, nbytes);
  } else if (payload.size() < nbytes) {
    throw IoError(path.string() + ": truncated payload, " + std::to_string(payload.size()) + " of " +
                  std::to_string(nbytes) + " bytes");
  } else if (payload.size() > nbytes) {
    // Raw payload sits at the end of the file.
    payload = payload.substr(payload.size() - nbytes);
  }

  std::vector<double> values(count);
  const char* p = payload.data();
  for (std::size_t i = 0; i < count; ++i) {
    switch (h.type) {
      case ScalarType::uint8: values[i] = static_cast<unsigned char>(p[i]); break;
      case ScalarType::int16: {
        std::int16_t v;
        std::memcpy(&v, p + 2 * i, 2);
        values[i] = v;
        break;
      }
      case ScalarType::float32: {
        float v;
        std::memcpy(&v, p + 4 * i, 4);
        values[i] = v;
        break;
      }
    }
  }
  return {h, Volume3(h.sizes, h.spacing, std::move(values))};
}

Volume3 load_nrrd(const std::filesystem::path& path) { return read_nrrd(path).volume; }

BinaryMask load_nrrd_mask(const std::filesystem::path& path) {
  Volume3 v = load_nrrd(path);
  std::vector<std::uint8_t> bits(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (x != 0.0 && x != 1.0) {
      throw FormatError(path.string() + ": voxel " + std::to_string(i) + " has non-binary value " + std::to_string(x));
    }
    bits[i] = x != 0.0;
  }
  return BinaryMask(v.dims(), v.spacing(), std::move(bits));
}

namespace {

std::string encode_payload(const Volume3& v, ScalarType type) {
  std::string out(v.size() * element_size(type), '\0');
  char* p = out.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = v[i];
    switch (type) {
      case ScalarType::uint8: {
        if (!(x >= 0.0 && x <= 255.0) || x != std::floor(x)) {
          throw FormatError("value " + std::to_string(x) + " not representable as uint8");
        }
        p[i] = static_cast<char>(static_cast<unsigned char>(x));
        break;
      }
      case ScalarType::int16: {
        if (!(x >= -32768.0 && x <= 32767.0) || x != std::floor(x)) {
          throw FormatError("value " + std::to_string(x) + " not representable as int16");
        }
        auto s = static_cast<std::int16_t>(x);
        std::memcpy(p + 2 * i, &s, 2);
        break;
      }
      case ScalarType::float32: {
        auto f = static_cast<float>(x);
        if (static_cast<double>(f) != x && !std::isnan(x)) {
          throw FormatError("value " + std::to_string(x) + " not representable as float32");
        }
        std::memcpy(p + 4 * i, &f, 4);
        break;
      }
    }
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string build_nrrd(const Dims& d, const Spacing& s, ScalarType type, NrrdEncoding encoding, std::string payload) {
  std::ostringstream h;
  h << "NRRD0004\n";
  h << "type: " << to_string(type) << "\n";
  h << "dimension: 3\n";
  h << "sizes: " << d.x << " " << d.y << " " << d.z << "\n";
  h << "spacings: " << format_double(s.x) << " " << format_double(s.y) << " " << format_double(s.z) << "\n";
  if (type != ScalarType::uint8) h << "endian: little\n";
  h << "encoding: " << (encoding == NrrdEncoding::raw ? "raw" : "gzip") << "\n\n";
  if (encoding == NrrdEncoding::gzip) payload = deflate_gzip(payload);
  return h.str() + payload;
}

}  // namespace

void save_nrrd(const Volume3& v, const std::filesystem::path& path, ScalarType type, NrrdEncoding encoding) {
  if (path.empty()) throw IoError("empty output path");
  write_file_atomic(path, build_nrrd(v.dims(), v.spacing(), type, encoding, encode_payload(v, type)));
}

void save_nrrd(const BinaryMask& m, const std::filesystem::path& path, NrrdEncoding encoding) {
  if (path.empty()) throw IoError("empty output path");
  auto data = m.data();
  std::string payload(reinterpret_cast<const char*>(data.data()), data.size());
  write_file_atomic(path, build_nrrd(m.dims(), m.spacing(), ScalarType::uint8, encoding, std::move(payload)));
}

void save_vxf(const Volume3& v, const std::filesystem::path& path) {
  if (path.empty()) throw IoError("empty output path");
  std::string out = "VXF1";
  auto put = [&out](const void* src, std::size_t n) { out.append(static_cast<const char*>(src), n); };
  for (int a = 0; a < 3; ++a) {
    if (v.dims()[a] > std::numeric_limits<std::uint32_t>::max()) throw FormatError("VXF dims exceed u32");
    auto d = static_cast<std::uint32_t>(v.dims()[a]);
    put(&d, 4);
  }
  for (int a = 0; a < 3; ++a) {
    auto s = static_cast<float>(v.spacing()[a]);
    put(&s, 4);
  }
  for (double x : v.data()) {
    auto f = static_cast<float>(x);
    put(&f, 4);
  }
  write_file_atomic(path, out);
}

Volume3 load_vxf(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 28 || bytes.compare(0, 4, "VXF1") != 0) throw FormatError(path.string() + ": missing VXF1 magic");
  std::uint32_t d[3];
  float s[3];
  std::memcpy(d, bytes.data() + 4, 12);
  std::memcpy(s, bytes.data() + 16, 12);
  Dims dims{d[0], d[1], d[2]};
  std::size_t count = dims.count();
  if (bytes.size() - 28 < count * 4) throw IoError(path.string() + ": truncated VXF payload");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 28 + 4 * i, 4);
    values[i] = f;
  }
  return Volume3(dims, {s[0], s[1], s[2]}, std::move(values));
}

}  // namespace cranaug
