#include "spc/png.h"

#include "spc/error.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace spc {

void
writePng(const Image& image, const std::string& path)
{
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file)
    throwData("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throwInternal("libpng initialisation failed");
  }

  std::vector<uint8_t> row(size_t(image.width) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throwData("failed writing " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(
    png, info, png_uint_32(image.width), png_uint_32(image.height), 8, PNG_COLOR_TYPE_RGB,
    PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; y++) {
    for (int x = 0; x < image.width; x++) {
      Vec3 c = image.pixel(size_t(y) * size_t(image.width) + size_t(x));
      for (int k = 0; k < 3; k++)
        row[size_t(x) * 3 + size_t(k)] =
          uint8_t(std::lround(std::clamp(c[k], 0.0, 1.0) * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace spc
