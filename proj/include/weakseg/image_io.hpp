#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "weakseg/image.hpp"

namespace weakseg {

// Malformed PPM/PGM input; byte_offset points at the offending byte.
class PnmParseError : public std::runtime_error {
 public:
  PnmParseError(const std::string& message, size_t byte_offset)
      : std::runtime_error(message + " (byte offset " +
                           std::to_string(byte_offset) + ")"),
        message_(message),
        byte_offset_(byte_offset) {}

  const std::string& message() const { return message_; }
  size_t byte_offset() const { return byte_offset_; }

 private:
  std::string message_;
  size_t byte_offset_;
};

// Binary PPM (P6) / PGM (P5), maxval 255 only. Readers reject short payloads
// and malformed headers with the byte offset; writers emit the canonical
// header "P6\n<w> <h>\n255\n" (resp. P5) so write/read round-trips are
// byte-identical.
ImageU8 read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageU8& image, const std::filesystem::path& path);
MaskU8 read_pgm(const std::filesystem::path& path);
void write_pgm(const MaskU8& mask, const std::filesystem::path& path);

// In-memory variants (used by tests and the readers/writers above).
ImageU8 decode_ppm(const std::string& bytes);
std::string encode_ppm(const ImageU8& image);
MaskU8 decode_pgm(const std::string& bytes);
std::string encode_pgm(const MaskU8& mask);

}  // namespace weakseg
