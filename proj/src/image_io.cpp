#include "weakseg/image_io.hpp"

#include <fstream>
#include <sstream>

namespace weakseg {

namespace {

// Header scanner with byte-offset tracking. Comments (# to end of line)
// count as whitespace.
class PnmScanner {
 public:
  explicit PnmScanner(const std::string& bytes) : bytes_(bytes) {}

  size_t pos() const { return pos_; }
  size_t size() const { return bytes_.size(); }
  const std::string& bytes() const { return bytes_; }

  void expect_magic(const char* magic) {
    if (bytes_.size() < 2 || bytes_[0] != magic[0] || bytes_[1] != magic[1]) {
      throw PnmParseError(std::string("expected magic '") + magic + "'", 0);
    }
    pos_ = 2;
  }

  // At least one whitespace byte, then any run of whitespace/comments.
  void skip_separator() {
    if (pos_ >= bytes_.size() || !is_space_or_comment()) {
      throw PnmParseError("expected whitespace", pos_);
    }
    while (pos_ < bytes_.size() && is_space_or_comment()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        ++pos_;
      }
    }
  }

  long parse_uint(const char* what) {
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      throw PnmParseError(std::string("expected ") + what, pos_);
    }
    long value = 0;
    const size_t start = pos_;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1000000000L) {
        throw PnmParseError(std::string(what) + " out of range", start);
      }
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte between maxval and the payload.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw PnmParseError("expected single whitespace before pixel data", pos_);
    }
    ++pos_;
  }

 private:
  bool is_space_or_comment() const {
    const unsigned char c = static_cast<unsigned char>(bytes_[pos_]);
    return std::isspace(c) || c == '#';
  }

  const std::string& bytes_;
  size_t pos_ = 0;
};

// Shared P5/P6 header parse; returns (width, height), leaves pos_ at payload.
std::pair<int, int> parse_header(PnmScanner& scan, const char* magic) {
  scan.expect_magic(magic);
  scan.skip_separator();
  const long width = scan.parse_uint("width");
  scan.skip_separator();
  const long height = scan.parse_uint("height");
  scan.skip_separator();
  const size_t maxval_pos = scan.pos();
  const long maxval = scan.parse_uint("maxval");
  if (maxval != 255) {
    throw PnmParseError("only maxval 255 is supported", maxval_pos);
  }
  if (width < 1 || height < 1 || width > 100000 || height > 100000) {
    throw PnmParseError("implausible dimensions", 2);
  }
  scan.expect_single_space();
  return {static_cast<int>(width), static_cast<int>(height)};
}

void check_payload(const PnmScanner& scan, size_t expected) {
  const size_t available = scan.size() - scan.pos();
  if (available < expected) {
    throw PnmParseError(
        "truncated pixel data, missing " + std::to_string(expected - available) +
            " bytes",
        scan.size());
  }
  if (available > expected) {
    throw PnmParseError("trailing data after pixel payload",
                        scan.pos() + expected);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace

ImageU8 decode_ppm(const std::string& bytes) {
  PnmScanner scan(bytes);
  const auto [width, height] = parse_header(scan, "P6");
  const size_t expected = static_cast<size_t>(width) * height * 3;
  check_payload(scan, expected);
  ImageU8 image(height, width);
  std::copy_n(bytes.begin() + static_cast<long>(scan.pos()), expected,
              image.rgb.begin());
  return image;
}

std::string encode_ppm(const ImageU8& image) {
  if (image.height <= 0 || image.width <= 0 ||
      image.rgb.size() != static_cast<size_t>(image.pixels()) * 3) {
    throw std::invalid_argument("encode_ppm: malformed image");
  }
  std::string out = "P6\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.rgb.data()), image.rgb.size());
  return out;
}

MaskU8 decode_pgm(const std::string& bytes) {
  PnmScanner scan(bytes);
  const auto [width, height] = parse_header(scan, "P5");
  const size_t expected = static_cast<size_t>(width) * height;
  check_payload(scan, expected);
  MaskU8 mask(height, width);
  std::copy_n(bytes.begin() + static_cast<long>(scan.pos()), expected,
              mask.labels.begin());
  return mask;
}

std::string encode_pgm(const MaskU8& mask) {
  if (mask.height <= 0 || mask.width <= 0 ||
      mask.labels.size() != static_cast<size_t>(mask.pixels())) {
    throw std::invalid_argument("encode_pgm: malformed mask");
  }
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(mask.labels.data()),
             mask.labels.size());
  return out;
}

ImageU8 read_ppm(const std::filesystem::path& path) {
  try {
    return decode_ppm(read_file(path));
  } catch (const PnmParseError& e) {
    throw PnmParseError(path.string() + ": " + e.message(), e.byte_offset());
  }
}

void write_ppm(const ImageU8& image, const std::filesystem::path& path) {
  write_file(path, encode_ppm(image));
}

MaskU8 read_pgm(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const PnmParseError& e) {
    throw PnmParseError(path.string() + ": " + e.message(), e.byte_offset());
  }
}

void write_pgm(const MaskU8& mask, const std::filesystem::path& path) {
  write_file(path, encode_pgm(mask));
}

}  // namespace weakseg
