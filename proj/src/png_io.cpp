#include "jffra/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace jffra {

Tensor read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw DataError("read_png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw DataError("read_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw DataError("read_png: decode failed for " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 W = png_get_image_width(png, info);
    const png_uint_32 H = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int C = png_get_channels(png, info);
    std::vector<png_byte> rowbuf(static_cast<size_t>(W) * C);
    Tensor out({static_cast<int>(H), static_cast<int>(W), C == 1 ? 1 : 3});
    for (png_uint_32 h = 0; h < H; ++h) {
        png_read_row(png, rowbuf.data(), nullptr);
        for (png_uint_32 w = 0; w < W; ++w)
            for (int c = 0; c < out.dim(2); ++c)
                out.at(static_cast<int>(h), static_cast<int>(w), c) =
                    rowbuf[static_cast<size_t>(w) * C + c] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return out;
}

void write_png(const std::string& path, const Tensor& img) {
    if (img.ndim() != 3 || (img.dim(2) != 1 && img.dim(2) != 3))
        throw ShapeError("write_png: image must be H x W x {1,3}");
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw DataError("write_png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw DataError("write_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw DataError("write_png: encode failed for " + path);
    }
    const int H = img.dim(0), W = img.dim(1), C = img.dim(2);
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(W), static_cast<png_uint_32>(H), 8,
                 C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> rowbuf(static_cast<size_t>(W) * C);
    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w)
            for (int c = 0; c < C; ++c) {
                const double v = std::min(1.0, std::max(0.0, img.at(h, w, c)));
                rowbuf[static_cast<size_t>(w) * C + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        png_write_row(png, rowbuf.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace jffra
