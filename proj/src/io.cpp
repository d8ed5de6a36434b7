#include "mcls/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mcls {

namespace fs = std::filesystem;

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  }
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes_atomic(const fs::path& path, const std::vector<unsigned char>& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot open '" + tmp.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into '" + path.string() + "'");
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_bytes_atomic(path, std::vector<unsigned char>(text.begin(), text.end()));
}

// ---------------------------------------------------------------------------
// PGM

GrayImage<double> parse_pgm(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw ParseError("not a binary PGM (missing P5 magic)", 0);
  }
  std::size_t p = 2;
  auto skip = [&]() {
    while (p < bytes.size()) {
      if (bytes[p] == '#') {
        while (p < bytes.size() && bytes[p] != '\n') ++p;
      } else if (std::isspace(bytes[p])) {
        ++p;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* field) {
    skip();
    const std::size_t start = p;
    unsigned long value = 0;
    while (p < bytes.size() && std::isdigit(bytes[p])) {
      value = value * 10 + static_cast<unsigned long>(bytes[p] - '0');
      if (value > 0xFFFFFFFFul) {
        throw ParseError(std::string("PGM ") + field + " out of range", start);
      }
      ++p;
    }
    if (p == start) {
      throw ParseError(std::string("PGM header: expected ") + field, start);
    }
    return std::pair{value, start};
  };

  if (p >= bytes.size() || !std::isspace(bytes[p])) {
    throw ParseError("PGM header: expected whitespace after magic", p);
  }
  const auto [width, width_at] = read_uint("width");
  const auto [height, height_at] = read_uint("height");
  const auto [maxval, maxval_at] = read_uint("maxval");
  if (width == 0) throw ParseError("PGM width must be positive", width_at);
  if (height == 0) throw ParseError("PGM height must be positive", height_at);
  if (maxval == 0 || maxval > 65535) {
    throw ParseError("PGM maxval must be in [1, 65535]", maxval_at);
  }
  if (p >= bytes.size() || !std::isspace(bytes[p])) {
    throw ParseError("PGM header: expected whitespace after maxval", p);
  }
  ++p;

  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t needed = count * bytes_per_sample;
  if (bytes.size() - p < needed) {
    throw ParseError("PGM payload truncated: expected " + std::to_string(needed) +
                         " bytes, found " + std::to_string(bytes.size() - p),
                     bytes.size());
  }

  GrayImage<double> image(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  double* out = image.data();
  const unsigned char* in = bytes.data() + p;
  if (bytes_per_sample == 1) {
    const double scale = maxval == 255 ? 1.0 : 255.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < count; ++i) {
      if (in[i] > maxval) throw ParseError("PGM sample exceeds maxval", p + i);
      out[i] = maxval == 255 ? static_cast<double>(in[i]) : in[i] * scale;
    }
  } else {
    const double scale = 255.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = (static_cast<unsigned>(in[2 * i]) << 8) | in[2 * i + 1];
      if (v > maxval) throw ParseError("PGM sample exceeds maxval", p + 2 * i);
      out[i] = v * scale;
    }
  }
  return image;
}

GrayImage<double> read_pgm(const fs::path& path) { return parse_pgm(read_bytes(path)); }

namespace {

std::vector<unsigned char> encode_pgm8(const Plane<std::uint8_t>& pixels) {
  std::ostringstream header;
  header << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  const std::string h = header.str();
  std::vector<unsigned char> bytes(h.begin(), h.end());
  bytes.insert(bytes.end(), pixels.data(), pixels.data() + pixels.size());
  return bytes;
}

}  // namespace

void write_pgm(const GrayImage<double>& image, const fs::path& path) {
  if (!image.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "write_pgm: non-finite pixel");
  }
  const Plane<std::uint8_t> pixels = image.round().max(0.0).min(255.0).cast<std::uint8_t>();
  write_bytes_atomic(path, encode_pgm8(pixels));
}

BinaryMask read_mask_pgm(const fs::path& path) {
  return threshold_mask(read_pgm(path), 127.0);
}

void write_mask_pgm(const BinaryMask& mask, const fs::path& path) {
  validate_mask(mask);
  const Plane<std::uint8_t> pixels = mask * std::uint8_t(255);
  write_bytes_atomic(path, encode_pgm8(pixels));
}

void write_ppm(const Plane<std::uint8_t>& red, const Plane<std::uint8_t>& green,
               const Plane<std::uint8_t>& blue, const fs::path& path) {
  require_same_shape(red, green, "write_ppm");
  require_same_shape(red, blue, "write_ppm");
  std::ostringstream header;
  header << "P6\n" << red.cols() << ' ' << red.rows() << "\n255\n";
  const std::string h = header.str();
  std::vector<unsigned char> bytes(h.begin(), h.end());
  bytes.reserve(bytes.size() + 3 * static_cast<std::size_t>(red.size()));
  for (Eigen::Index i = 0; i < red.size(); ++i) {
    bytes.push_back(red.data()[i]);
    bytes.push_back(green.data()[i]);
    bytes.push_back(blue.data()[i]);
  }
  write_bytes_atomic(path, bytes);
}

// ---------------------------------------------------------------------------
// FMAP

namespace {

constexpr std::size_t kFmapHeader = 12;

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, std::vector<unsigned char>& out) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

}  // namespace

Plane<float> parse_fmap(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "FMAP", 4) != 0) {
    throw ParseError("bad FMAP magic", 0);
  }
  if (bytes.size() < kFmapHeader) {
    throw ParseError("FMAP header truncated", bytes.size());
  }
  const std::uint32_t width = load_u32_le(bytes.data() + 4);
  const std::uint32_t height = load_u32_le(bytes.data() + 8);
  if (width == 0 || height == 0) {
    throw ParseError("FMAP dimensions must be positive", 4);
  }
  const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
  const std::uint64_t payload = bytes.size() - kFmapHeader;
  if (payload != count * 4) {
    throw ParseError("FMAP size mismatch: header declares " + std::to_string(width) + "x" +
                         std::to_string(height) + " (" + std::to_string(count * 4) +
                         " payload bytes), file has " + std::to_string(payload),
                     bytes.size());
  }
  Plane<float> field(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  const unsigned char* in = bytes.data() + kFmapHeader;
  for (std::uint64_t i = 0; i < count; ++i) {
    field.data()[i] = std::bit_cast<float>(load_u32_le(in + 4 * i));
  }
  return field;
}

std::vector<unsigned char> encode_fmap(const Plane<float>& field) {
  std::vector<unsigned char> bytes{'F', 'M', 'A', 'P'};
  bytes.reserve(kFmapHeader + 4 * static_cast<std::size_t>(field.size()));
  store_u32_le(static_cast<std::uint32_t>(field.cols()), bytes);
  store_u32_le(static_cast<std::uint32_t>(field.rows()), bytes);
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    store_u32_le(std::bit_cast<std::uint32_t>(field.data()[i]), bytes);
  }
  return bytes;
}

Plane<float> read_fmap(const fs::path& path) { return parse_fmap(read_bytes(path)); }

void write_fmap(const Plane<float>& field, const fs::path& path) {
  write_bytes_atomic(path, encode_fmap(field));
}

void write_fmap(const Plane<double>& field, const fs::path& path) {
  write_fmap(Plane<float>(field.cast<float>()), path);
}

ProbMap<double> read_prob_map(const fs::path& path) {
  const Plane<float> raw = read_fmap(path);
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const float v = raw.data()[i];
    if (std::isnan(v)) {
      throw ParseError("NaN in probability map at element " + std::to_string(i),
                       kFmapHeader + 4 * static_cast<std::size_t>(i));
    }
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ParseError("probability outside [0, 1] at element " + std::to_string(i),
                       kFmapHeader + 4 * static_cast<std::size_t>(i));
    }
  }
  return raw.cast<double>();
}

LevelSetField<double> read_level_set(const fs::path& path) {
  const Plane<float> raw = read_fmap(path);
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw.data()[i])) {
      throw ParseError("non-finite level-set value at element " + std::to_string(i),
                       kFmapHeader + 4 * static_cast<std::size_t>(i));
    }
  }
  return raw.cast<double>();
}

}  // namespace mcls
