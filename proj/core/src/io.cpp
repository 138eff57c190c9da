#include "codedblur/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace codedblur::io {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

bool host_little_endian() {
  const std::uint16_t x = 1;
  return *reinterpret_cast<const std::uint8_t*>(&x) == 1;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const LinearImage& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_pfm: only 1- or 3-channel images");
  if (!img.all_finite()) throw std::invalid_argument("write_pfm: non-finite values");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  f << (img.channels == 3 ? "PF" : "Pf") << "\n"
    << img.width << " " << img.height << "\n"
    << "-1.000000\n";
  std::vector<float> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = img.height - 1; y >= 0; --y) {  // bottom-to-top
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        row[static_cast<size_t>(x) * img.channels + c] = static_cast<float>(img.at(c, y, x));
    f.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!f) fail(path, "write failed");
}

LinearImage read_pfm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  f >> magic >> w >> h >> scale;
  if (!f || (magic != "PF" && magic != "Pf")) fail(path, "not a PFM file");
  if (w <= 0 || h <= 0) fail(path, "bad PFM dimensions");
  f.get();  // single whitespace after the scale
  const int channels = magic == "PF" ? 3 : 1;
  const bool file_little = scale < 0.0;
  if (file_little != host_little_endian())
    fail(path, "PFM endianness does not match host");
  LinearImage img(h, w, channels);
  std::vector<float> row(static_cast<size_t>(w) * channels);
  for (int y = h - 1; y >= 0; --y) {
    f.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!f) fail(path, "truncated PFM data");
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(c, y, x) = row[static_cast<size_t>(x) * channels + c];
  }
  return img;
}

void write_png(const std::filesystem::path& path, const LinearImage& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_png: only 1- or 3-channel images");
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(path, "libpng write error");
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double v = img.at(c, y, x);
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        row[static_cast<size_t>(x) * img.channels + c] =
            static_cast<png_byte>(std::lround(v * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

LinearImage read_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) fail(path, "cannot open");
  png_byte header[8];
  if (std::fread(header, 1, 8, fp) != 8 || png_sig_cmp(header, 0, 8)) {
    std::fclose(fp);
    fail(path, "not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(path, "undecodable PNG");
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_png(png, info,
               PNG_TRANSFORM_SCALE_16 | PNG_TRANSFORM_STRIP_ALPHA |
                   PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND,
               nullptr);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = png_get_channels(png, info);
  png_bytepp rows = png_get_rows(png, info);
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(path, "unsupported channel count after expansion");
  }
  LinearImage img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = rows[y][static_cast<size_t>(x) * ch + (ch == 3 ? c : 0)] / 255.0;
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string schedule_text(std::span<const double> psi) {
  std::string out;
  for (double v : psi) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<double> read_schedule(const std::filesystem::path& path, int expected_count) {
  std::ifstream f(path);
  if (!f) fail(path, "cannot open schedule file");
  std::vector<double> psi;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str())
      fail(path, "line " + std::to_string(lineno) + " is not a number");
    psi.push_back(v);
  }
  if (expected_count >= 0 && static_cast<int>(psi.size()) != expected_count)
    fail(path, "expected " + std::to_string(expected_count) + " schedule values, found " +
                   std::to_string(psi.size()));
  return psi;
}

void write_schedule(const std::filesystem::path& path, std::span<const double> psi) {
  write_text_file(path, schedule_text(psi));
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

LinearImage stack_to_image(const optics::PSFStack& stack) {
  const int k = stack.kernel_size;
  LinearImage img(stack.count * k, k, 3);
  for (int n = 0; n < stack.count; ++n)
    for (int c = 0; c < 3; ++c) {
      auto kern = stack.kernel(n, c);
      for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x)
          img.at(c, n * k + y, x) = kern[static_cast<size_t>(y) * k + x];
    }
  return img;
}

LinearImage contact_sheet(const optics::PSFStack& stack) {
  const int k = stack.kernel_size;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(stack.count))));
  const int rows = (stack.count + cols - 1) / cols;
  LinearImage sheet(rows * k, cols * k, 3);
  for (int n = 0; n < stack.count; ++n) {
    double peak = 0.0;
    for (int c = 0; c < 3; ++c)
      for (double v : stack.kernel(n, c)) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;
    const int oy = (n / cols) * k, ox = (n % cols) * k;
    for (int c = 0; c < 3; ++c) {
      auto kern = stack.kernel(n, c);
      for (int y = 0; y < k; ++y)
        for (int x = 0; x < k; ++x)
          sheet.at(c, oy + y, ox + x) = kern[static_cast<size_t>(y) * k + x] / peak;
    }
  }
  return sheet;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) fail(path, "write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(path, "cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace codedblur::io
