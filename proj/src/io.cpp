#include "latentedit/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <utility>
#include <vector>

namespace latentedit {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

constexpr char kMagic[4] = {'L', 'T', 'E', 'D'};

template <typename T>
void append_le(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

void require(bool ok, errc code, const std::string& message) {
  if (!ok) fail(code, message);
}

std::string pgm_bytes(int width, int height, const std::vector<std::uint8_t>& pixels) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

PgmImage parse_pgm(std::string_view bytes, const std::string& origin) {
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5', errc::bad_magic,
          origin + ": not a binary PGM (P5) file");
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    require(pos < bytes.size(), errc::truncated_payload, origin + ": truncated PGM header");
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    require(any, errc::io_failure, origin + ": malformed PGM header");
    return value;
  };
  PgmImage img;
  img.width = static_cast<int>(next_token());
  img.height = static_cast<int>(next_token());
  const long maxval = next_token();
  require(img.width >= 1 && img.height >= 1, errc::io_failure, origin + ": bad PGM dims");
  require(maxval == 255, errc::io_failure, origin + ": only maxval 255 PGM is supported");
  require(pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])),
          errc::io_failure, origin + ": malformed PGM header");
  ++pos;
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  require(bytes.size() - pos >= count, errc::truncated_payload,
          origin + ": truncated PGM payload");
  img.pixels.resize(count);
  std::memcpy(img.pixels.data(), bytes.data() + pos, count);
  return img;
}

}  // namespace

std::string encode_latent(const Grid& grid) {
  const Shape& s = grid.shape();
  std::string out;
  out.reserve(19 + static_cast<std::size_t>(s.volume()) * 4);
  out.append(kMagic, 4);
  append_le<std::uint16_t>(out, kLatentVersion);
  out.push_back(static_cast<char>(kLatentDtypeF32));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.channels));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.height));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.width));
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    append_le<float>(out, static_cast<float>(grid.array()[i]));
  return out;
}

Grid decode_latent(std::string_view bytes, const std::string& origin) {
  constexpr std::size_t header_size = 4 + 2 + 1 + 3 * 4;
  require(bytes.size() >= 4, errc::truncated_payload, origin + ": file shorter than the magic");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, errc::bad_magic,
          origin + ": bad magic, not a latent file");
  require(bytes.size() >= header_size, errc::truncated_payload, origin + ": truncated header");
  const auto version = read_le<std::uint16_t>(bytes, 4);
  require(version == kLatentVersion, errc::bad_version,
          origin + ": unsupported version " + std::to_string(version));
  const auto dtype = static_cast<std::uint8_t>(bytes[6]);
  require(dtype == kLatentDtypeF32, errc::bad_dtype,
          origin + ": unsupported dtype code " + std::to_string(dtype));
  const Shape shape{static_cast<int>(read_le<std::uint32_t>(bytes, 7)),
                    static_cast<int>(read_le<std::uint32_t>(bytes, 11)),
                    static_cast<int>(read_le<std::uint32_t>(bytes, 15))};
  if (!shape.valid()) fail(errc::io_failure, origin + ": invalid shape " + shape.str());
  const std::size_t count = static_cast<std::size_t>(shape.volume());
  require(bytes.size() - header_size == count * 4, errc::truncated_payload,
          origin + ": payload is " + std::to_string(bytes.size() - header_size) +
              " bytes, expected " + std::to_string(count * 4));
  Grid::Array data(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const float v = read_le<float>(bytes, header_size + i * 4);
    if (!std::isfinite(v))
      fail(errc::non_finite, origin + ": non-finite payload value at index " + std::to_string(i));
    data[static_cast<Eigen::Index>(i)] = static_cast<double>(v);
  }
  return Grid(shape, std::move(data));
}

void write_latent(const std::filesystem::path& path, const Grid& grid) {
  write_bytes_atomic(path, encode_latent(grid));
}

Grid read_latent(const std::filesystem::path& path) {
  return decode_latent(read_bytes(path), path.string());
}

void write_map_pgm(const std::filesystem::path& path, const SimilarityMap& map, MapRange range) {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(map.values().size()));
  for (Eigen::Index i = 0; i < map.values().size(); ++i) {
    double v = map.values()[i];
    if (range == MapRange::signed_raw) v = (v + 1.0) / 2.0;
    if (!(v >= 0.0 && v <= 1.0))
      fail(errc::invalid_argument, "map value outside the exportable range");
    pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::llround(v * 255.0));
  }
  write_bytes_atomic(path, pgm_bytes(map.width(), map.height(), pixels));
}

void write_latent_channel_pgm(const std::filesystem::path& path, const Grid& grid, int channel) {
  const Shape& s = grid.shape();
  if (channel < 0 || channel >= s.channels)
    fail(errc::invalid_argument, "channel " + std::to_string(channel) + " out of range");
  const Eigen::Index plane = s.spatial();
  const auto segment = grid.array().segment(static_cast<Eigen::Index>(channel) * plane, plane);
  const double lo = segment.minCoeff();
  const double hi = segment.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(plane));
  for (Eigen::Index i = 0; i < plane; ++i)
    pixels[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::llround((segment[i] - lo) / span * 255.0));
  write_bytes_atomic(path, pgm_bytes(s.width, s.height, pixels));
}

void write_mask_pgm(const std::filesystem::path& path, const RegionMask& mask) {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(mask.height()) * mask.width());
  for (int h = 0; h < mask.height(); ++h)
    for (int w = 0; w < mask.width(); ++w)
      pixels[static_cast<std::size_t>(h) * mask.width() + w] = mask.includes(h, w) ? 255 : 0;
  write_bytes_atomic(path, pgm_bytes(mask.width(), mask.height(), pixels));
}

RegionMask read_mask_pgm(const std::filesystem::path& path) {
  const PgmImage img = parse_pgm(read_bytes(path), path.string());
  std::vector<std::uint8_t> include(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) include[i] = img.pixels[i] != 0;
  return RegionMask(img.height, img.width, std::move(include));
}

Grid read_pgm_as_grid(const std::filesystem::path& path) {
  const PgmImage img = parse_pgm(read_bytes(path), path.string());
  Grid::Array data(static_cast<Eigen::Index>(img.pixels.size()));
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    data[static_cast<Eigen::Index>(i)] = static_cast<double>(img.pixels[i]);
  return Grid(Shape{1, img.height, img.width}, std::move(data));
}

void write_bytes_atomic(const std::filesystem::path& path, std::string_view bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(errc::io_failure, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(errc::io_failure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(errc::io_failure, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_failure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(errc::io_failure, "read failure on " + path.string());
  return bytes;
}

}  // namespace latentedit
