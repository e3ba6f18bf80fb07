#include "motionprep/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace motionprep {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open file: " + path);
  return f;
}

Image load_png_file(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  png_set_expand(png);  // palette/low-bit-depth/tRNS to 8-bit
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  const png_byte color = png_get_color_type(png, info);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unsupported PNG channel count in " + path);
  }

  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * width * channels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_bytes(bytes.data(), width, height, channels);
}

Image load_jpeg_file(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  jpeg_decompress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jerr.error_exit = [](j_common_ptr ci) {
    char buf[JMSG_LENGTH_MAX];
    (*ci->err->format_message)(ci, buf);
    throw IoError(std::string("JPEG decode error: ") + buf);
  };
  jpeg_create_decompress(&cinfo);
  try {
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    const int width = cinfo.output_width;
    const int height = cinfo.output_height;
    const int channels = cinfo.output_components;
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = bytes.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_bytes(bytes.data(), width, height, channels);
  } catch (...) {
    jpeg_destroy_decompress(&cinfo);
    throw;
  }
}

}  // namespace

Image load_image(const std::string& path) {
  std::uint8_t magic[4] = {0};
  {
    FilePtr f = open_file(path, "rb");
    if (std::fread(magic, 1, 4, f.get()) != 4) throw IoError("file too short: " + path);
  }
  if (magic[0] == 0x89 && magic[1] == 'P') return load_png_file(path);
  if (magic[0] == 0xff && magic[1] == 0xd8) return load_jpeg_file(path);
  throw IoError("unsupported image format (expected PNG or JPEG): " + path);
}

void save_png(const std::string& path, const Image& img) {
  if (img.empty() || (img.channels != 1 && img.channels != 3)) {
    throw IoError("save_png: image must be non-empty gray or RGB");
  }
  const std::vector<std::uint8_t> bytes = to_bytes(img);
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path);
  }
  png_init_io(png, f.get());
  // Fixed settings keep the encoded bytes reproducible across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * img.width * img.channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_mask_png(const std::string& path, const std::vector<std::uint8_t>& mask, int width,
                   int height) {
  if (static_cast<std::size_t>(width) * height != mask.size()) {
    throw IoError("save_mask_png: mask size mismatch");
  }
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode mask PNG: " + path);
  }
  png_init_io(png, f.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, width, height, 1, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int stride = (width + 7) / 8;
  std::vector<std::uint8_t> packed(static_cast<std::size_t>(stride) * height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (mask[static_cast<std::size_t>(y) * width + x]) {
        packed[static_cast<std::size_t>(y) * stride + x / 8] |= std::uint8_t(0x80u >> (x % 8));
      }
    }
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = packed.data() + static_cast<std::size_t>(y) * stride;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> load_mask_png(const std::string& path, int* width, int* height) {
  const Image img = load_image(path);
  if (img.channels != 1) throw IoError("mask PNG is not grayscale: " + path);
  if (width) *width = img.width;
  if (height) *height = img.height;
  std::vector<std::uint8_t> mask(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) mask[i] = img.data[i] > 0.5f ? 1 : 0;
  return mask;
}

void save_pfm(const std::string& path, const std::vector<float>& values, int width, int height) {
  if (static_cast<std::size_t>(width) * height != values.size()) {
    throw IoError("save_pfm: size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file: " + path);
  out << "Pf\n" << width << " " << height << "\n-1.0\n";
  // PFM stores rows bottom-to-top.
  for (int y = height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(values.data() + static_cast<std::size_t>(y) * width),
              static_cast<std::streamsize>(sizeof(float)) * width);
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<float> load_pfm(const std::string& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::string tag;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> tag >> w >> h >> scale;
  if (tag != "Pf" || w <= 0 || h <= 0 || scale >= 0.0) {
    throw IoError("unsupported PFM header in " + path);
  }
  in.get();  // single whitespace after the header
  std::vector<float> values(static_cast<std::size_t>(w) * h);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(values.data() + static_cast<std::size_t>(y) * w),
            static_cast<std::streamsize>(sizeof(float)) * w);
  }
  if (!in) throw IoError("truncated PFM: " + path);
  if (width) *width = w;
  if (height) *height = h;
  return values;
}

}  // namespace motionprep
