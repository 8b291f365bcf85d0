#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "lusfeat/image.hpp"

namespace lusfeat {

enum class ImageFormat {
  Gray8,    // binary portable graymap, "P5", maxval 255
  Float32,  // portable floatmap, "Pf", one channel
};

class FormatError : public Error {
 public:
  enum class Kind { MalformedHeader, DimensionMismatch, TruncatedPayload, Io };

  FormatError(Kind kind, const std::string& what) : Error(describe(kind) + ": " + what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  static std::string describe(Kind k) {
    switch (k) {
      case Kind::MalformedHeader: return "malformed header";
      case Kind::DimensionMismatch: return "dimension mismatch";
      case Kind::TruncatedPayload: return "truncated payload";
      case Kind::Io: return "i/o error";
    }
    return "format error";
  }

  Kind kind_;
};

// Picks the format from the file extension (.pgm or .pfm).
inline ImageFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm" || ext == ".PGM") return ImageFormat::Gray8;
  if (ext == ".pfm" || ext == ".PFM") return ImageFormat::Float32;
  throw FormatError(FormatError::Kind::Io, "unknown image extension '" + ext + "' (expected .pgm or .pfm)");
}

namespace detail {

// Reads the whitespace/comment separated header tokens of a netpbm-style file.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (start == pos_) throw FormatError(FormatError::Kind::MalformedHeader, "unexpected end of header");
    return std::string(bytes_.substr(start, pos_ - start));
  }

  long long integer(const char* what) {
    const std::string t = token();
    long long v = 0;
    std::size_t used = 0;
    try {
      v = std::stoll(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) {
      throw FormatError(FormatError::Kind::MalformedHeader, std::string("bad ") + what + " '" + t + "'");
    }
    return v;
  }

  double real(const char* what) {
    const std::string t = token();
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size() || !std::isfinite(v)) {
      throw FormatError(FormatError::Kind::MalformedHeader, std::string("bad ") + what + " '" + t + "'");
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw FormatError(FormatError::Kind::MalformedHeader, "missing separator before payload");
    }
    return pos_ + 1;
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline void check_dims(long long width, long long height) {
  constexpr long long kMaxExtent = 1 << 20;
  if (width < static_cast<long long>(Image::kMinExtent) || height < static_cast<long long>(Image::kMinExtent) ||
      width > kMaxExtent || height > kMaxExtent) {
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "unsupported dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
}

inline void check_payload(std::size_t have, std::size_t want) {
  if (have < want) {
    throw FormatError(FormatError::Kind::TruncatedPayload,
                      "expected " + std::to_string(want) + " payload bytes, found " + std::to_string(have));
  }
  if (have > want) {
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "payload has " + std::to_string(have - want) + " bytes beyond the declared dimensions");
  }
}

inline std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}

inline float quantize_channel(float v) { return std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f); }

}  // namespace detail

inline Image decode_image(std::string_view bytes, ImageFormat format) {
  detail::HeaderReader header(bytes);
  const std::string magic = header.token();

  if (format == ImageFormat::Gray8) {
    if (magic != "P5") throw FormatError(FormatError::Kind::MalformedHeader, "expected magic P5, got '" + magic + "'");
    const long long width = header.integer("width");
    const long long height = header.integer("height");
    const long long maxval = header.integer("maxval");
    if (maxval != 255) {
      throw FormatError(FormatError::Kind::MalformedHeader, "only maxval 255 is supported, got " + std::to_string(maxval));
    }
    detail::check_dims(width, height);
    const std::size_t offset = header.payload_offset();
    const auto rows = static_cast<std::size_t>(height);
    const auto cols = static_cast<std::size_t>(width);
    detail::check_payload(bytes.size() - offset, rows * cols);
    std::vector<float> data(rows * cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = static_cast<float>(static_cast<unsigned char>(bytes[offset + i])) / 255.0f;
    }
    return Image(rows, cols, std::move(data));
  }

  if (magic != "Pf") throw FormatError(FormatError::Kind::MalformedHeader, "expected magic Pf, got '" + magic + "'");
  const long long width = header.integer("width");
  const long long height = header.integer("height");
  const double scale = header.real("scale");
  if (scale == 0.0) throw FormatError(FormatError::Kind::MalformedHeader, "scale must be nonzero");
  detail::check_dims(width, height);
  const std::size_t offset = header.payload_offset();
  const auto rows = static_cast<std::size_t>(height);
  const auto cols = static_cast<std::size_t>(width);
  detail::check_payload(bytes.size() - offset, rows * cols * sizeof(float));

  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  std::vector<float> data(rows * cols);
  // Scanlines are stored bottom-to-top.
  for (std::size_t fr = 0; fr < rows; ++fr) {
    const std::size_t r = rows - 1 - fr;
    for (std::size_t c = 0; c < cols; ++c) {
      std::uint32_t word;
      std::memcpy(&word, bytes.data() + offset + (fr * cols + c) * sizeof(float), sizeof(word));
      if (swap) word = detail::byteswap32(word);
      const float v = std::bit_cast<float>(word);
      if (!std::isfinite(v)) throw NonFiniteError(r, c);
      data[r * cols + c] = v;
    }
  }
  return Image(rows, cols, std::move(data));
}

inline std::string encode_image(const Image& img, ImageFormat format) {
  require_finite(img);
  std::string out;
  if (format == ImageFormat::Gray8) {
    out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
    const std::size_t offset = out.size();
    out.resize(offset + img.size());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
      out[offset + i] = static_cast<char>(static_cast<unsigned char>(detail::quantize_channel(px[i])));
    }
    return out;
  }

  const char* scale = std::endian::native == std::endian::little ? "-1.0" : "1.0";
  out = "Pf\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n" + scale + "\n";
  const std::size_t offset = out.size();
  out.resize(offset + img.size() * sizeof(float));
  for (std::size_t fr = 0; fr < img.rows(); ++fr) {
    const auto row = img.row(img.rows() - 1 - fr);
    std::memcpy(out.data() + offset + fr * img.cols() * sizeof(float), row.data(), row.size_bytes());
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// Writes to a sibling temporary file and renames it over the target, so
// readers never observe a partially written output.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatError::Kind::Io, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw FormatError(FormatError::Kind::Io, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FormatError(FormatError::Kind::Io, "cannot rename onto '" + path.string() + "'");
  }
}

inline Image load_image(const std::filesystem::path& path, ImageFormat format) {
  return decode_image(read_file(path), format);
}

inline Image load_image(const std::filesystem::path& path) { return load_image(path, format_from_path(path)); }

inline void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  write_file_atomic(path, encode_image(img, format));
}

inline void save_image(const Image& img, const std::filesystem::path& path) {
  save_image(img, path, format_from_path(path));
}

}  // namespace lusfeat
