#include "propnet/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "propnet/error.hpp"

namespace propnet {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw InputError("cannot open image file " + path.string());
  return f;
}

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Image load_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw InputError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw InputError("libpng initialisation failed");
  }
  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("corrupt PNG file " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.channels = png_get_channels(png, info);
  if (img.width == 0 || img.height == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("zero-dimension image " + path.string());
  }
  img.pixels.resize(img.width * img.height * img.channels);
  rows.resize(img.height);
  for (std::size_t y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + y * img.width * img.channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (img.channels != 1 && img.channels != 3) {
    throw InputError("unsupported PNG channel layout in " + path.string());
  }
  return img;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image file " + path.string());
  if (pgm_token(in) != "P5") throw InputError("not a binary PGM or PNG file: " + path.string());
  Image img;
  try {
    img.width = std::stoul(pgm_token(in));
    img.height = std::stoul(pgm_token(in));
    const unsigned long maxval = std::stoul(pgm_token(in));
    if (maxval == 0 || maxval > 255) throw InputError("unsupported PGM maxval in " + path.string());
  } catch (const std::logic_error&) {
    throw InputError("malformed PGM header in " + path.string());
  }
  if (img.width == 0 || img.height == 0) throw InputError("zero-dimension image " + path.string());
  img.channels = 1;
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw InputError("truncated PGM data in " + path.string());
  }
  return img;
}

double luma(const Image& image, std::size_t y, std::size_t x) {
  if (image.channels == 1) return image.at(y, x, 0) / 255.0;
  return (0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2)) / 255.0;
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("image file not found: " + path.string());
  return has_png_signature(path) ? load_png(path) : load_pgm(path);
}

void write_pgm(const std::filesystem::path& path, const Image& gray) {
  if (gray.channels != 1) throw InputError("write_pgm needs a single-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "P5\n" << gray.width << ' ' << gray.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.pixels.data()), static_cast<std::streamsize>(gray.pixels.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayRaster& raster) {
  Image img{raster.width, raster.height, 1, std::vector<std::uint8_t>(raster.values.size())};
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(raster.values[i], 0.0, 1.0) * 255.0));
  }
  write_pgm(path, img);
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw InputError("write_png supports gray or RGB images");
  FilePtr f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw InputError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InputError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("failed writing PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.pixels.data() + y * image.width * image.channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayRaster to_grayscale(const Image& image) {
  if (image.width == 0 || image.height == 0) throw InputError("zero-dimension image");
  GrayRaster out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x) out.at(y, x) = luma(image, y, x);
  return out;
}

GrayRaster tensor_to_grayscale(const Tensor& rgb) {
  if (rgb.rank() != 3 || (rgb.dim(0) != 3 && rgb.dim(0) != 1)) {
    throw DimensionError("tensor_to_grayscale expects [3×H×W] or [1×H×W], got " + shape_to_string(rgb.shape()));
  }
  const std::size_t h = rgb.dim(1), w = rgb.dim(2);
  GrayRaster out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      out.at(y, x) = rgb.dim(0) == 1 ? rgb.at(0, y, x)
                                     : 0.299 * rgb.at(0, y, x) + 0.587 * rgb.at(1, y, x) + 0.114 * rgb.at(2, y, x);
    }
  }
  return out;
}

Tensor resize_bilinear(const Tensor& planes, std::size_t out_h, std::size_t out_w) {
  if (planes.rank() != 3) throw DimensionError("resize_bilinear expects [C×H×W], got " + shape_to_string(planes.shape()));
  const std::size_t C = planes.dim(0), H = planes.dim(1), W = planes.dim(2);
  Tensor out({C, out_h, out_w});
  const double sy = static_cast<double>(H) / static_cast<double>(out_h);
  const double sx = static_cast<double>(W) / static_cast<double>(out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double fy = std::clamp((static_cast<double>(oy) + 0.5) * sy - 0.5, 0.0, static_cast<double>(H - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, H - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double fx = std::clamp((static_cast<double>(ox) + 0.5) * sx - 0.5, 0.0, static_cast<double>(W - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, W - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < C; ++c) {
        const double top = planes.at(c, y0, x0) * (1 - wx) + planes.at(c, y0, x1) * wx;
        const double bot = planes.at(c, y1, x0) * (1 - wx) + planes.at(c, y1, x1) * wx;
        out.at(c, oy, ox) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Tensor image_to_tensor(const Image& image, std::size_t size) {
  if (image.width == 0 || image.height == 0) throw InputError("zero-dimension image");
  Tensor planes({3, image.height, image.width});
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t src = image.channels == 1 ? 0 : c;
        planes.at(c, y, x) = image.at(y, x, src) / 255.0;
      }
    }
  }
  if (image.height == size && image.width == size) return planes;
  return resize_bilinear(planes, size, size);
}

}  // namespace propnet
