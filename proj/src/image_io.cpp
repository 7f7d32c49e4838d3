#include "vitastar/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace vitastar {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) {
                      return std::tolower(static_cast<unsigned char>(a)) ==
                             std::tolower(static_cast<unsigned char>(b));
                    });
}

// Skips PGM whitespace and '#' comment lines.
int next_pgm_token(std::istream& in, std::string& token) {
  token.clear();
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) break;
  }
  if (ch == EOF) return -1;
  while (ch != EOF && !std::isspace(ch) && ch != '#') {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  if (ch == '#') in.unget();
  return 0;
}

std::vector<uint8_t> read_pgm_gray(const std::string& path, int& height,
                                   int& width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string tok;
  if (next_pgm_token(in, tok) < 0 || tok != "P5") {
    throw IoError(path + ": not a binary PGM (P5) file");
  }
  long w = 0, h = 0, maxval = 0;
  auto read_long = [&](long& out) {
    if (next_pgm_token(in, tok) < 0) throw IoError(path + ": truncated header");
    try {
      out = std::stol(tok);
    } catch (const std::exception&) {
      throw IoError(path + ": bad header token '" + tok + "'");
    }
  };
  read_long(w);
  read_long(h);
  read_long(maxval);
  if (w <= 0 || h <= 0) throw IoError(path + ": bad dimensions");
  if (maxval <= 0 || maxval > 255) {
    throw IoError(path + ": unsupported bit depth (maxval " +
                  std::to_string(maxval) + ")");
  }
  std::vector<uint8_t> pixels(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(pixels.data()),
          static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw IoError(path + ": truncated pixel data");
  }
  height = static_cast<int>(h);
  width = static_cast<int>(w);
  return pixels;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

std::vector<uint8_t> read_png_gray(const std::string& path, int& height,
                                   int& width) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng info init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": PNG decode failed");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported bit depth 16, expected 8-bit");
  }
  // normalize everything to 8-bit grayscale
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != w) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": could not normalize PNG to 8-bit grayscale");
  }
  std::vector<uint8_t> pixels(static_cast<size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = pixels.data() + r * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  height = static_cast<int>(h);
  width = static_cast<int>(w);
  return pixels;
}

}  // namespace

OccupancyMap load_image(const std::string& path, int obstacle_cutoff) {
  if (obstacle_cutoff < 0 || obstacle_cutoff > 256) {
    throw ParameterError("obstacle cutoff must lie in [0, 256]");
  }
  int h = 0, w = 0;
  std::vector<uint8_t> pixels;
  if (has_suffix(path, ".png")) {
    pixels = read_png_gray(path, h, w);
  } else if (has_suffix(path, ".pgm")) {
    pixels = read_pgm_gray(path, h, w);
  } else {
    throw IoError(path + ": unsupported map image format (use .pgm or .png)");
  }
  std::vector<uint8_t> cells(pixels.size());
  for (size_t i = 0; i < pixels.size(); ++i) {
    cells[i] = pixels[i] < obstacle_cutoff ? 1 : 0;
  }
  return OccupancyMap(h, w, std::move(cells));
}

void save_pgm(const OccupancyMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << map.width() << " " << map.height() << "\n255\n";
  std::vector<uint8_t> pixels(map.cells().size());
  for (size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = map.cells()[i] ? 0 : 255;
  }
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for " + path);
}

RgbImage::RgbImage(int h, int w, uint8_t r, uint8_t g, uint8_t b)
    : height(h), width(w) {
  pixels.resize(static_cast<size_t>(h) * w * 3);
  for (size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
}

void RgbImage::set(int row, int col, uint8_t r, uint8_t g, uint8_t b) {
  const size_t i = (static_cast<size_t>(row) * width + col) * 3;
  pixels[i] = r;
  pixels[i + 1] = g;
  pixels[i + 2] = b;
}

void save_png(const RgbImage& image, const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng info init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": PNG encode failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(image.height);
  for (int r = 0; r < image.height; ++r) {
    rows[r] = const_cast<png_bytep>(image.pixels.data()) +
              static_cast<size_t>(r) * image.width * 3;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace vitastar
