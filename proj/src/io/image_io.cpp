#include "splatlm/io/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace splatlm::io {

Image widen(const ImageF& img) {
    Image out(img.width, img.height);
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i];
    return out;
}

ImageF narrow(const Image& img) {
    ImageF out;
    out.width = img.width;
    out.height = img.height;
    out.data.resize(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = static_cast<float>(img.data[i]);
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const char* what) {
    throw std::runtime_error(std::string(what) + ": " + path.string());
}

void write_png_impl(const std::filesystem::path& path, const Image& img, int bit_depth) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) fail(path, "cannot open for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "png write error");
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, bit_depth, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double max_val = bit_depth == 8 ? 255.0 : 65535.0;
    if (bit_depth == 8) {
        std::vector<png_byte> row(static_cast<size_t>(img.width) * 3);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
                    row[3 * x + c] = static_cast<png_byte>(std::lround(v * max_val));
                }
            png_write_row(png, row.data());
        }
    } else {
        std::vector<png_byte> row(static_cast<size_t>(img.width) * 6);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
                    const auto q = static_cast<unsigned>(std::lround(v * max_val));
                    row[6 * x + 2 * c] = static_cast<png_byte>(q >> 8);  // network byte order
                    row[6 * x + 2 * c + 1] = static_cast<png_byte>(q & 0xff);
                }
            png_write_row(png, row.data());
        }
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const std::filesystem::path& path, const Image& img) {
    write_png_impl(path, img, 8);
}

void write_png16(const std::filesystem::path& path, const Image& img) {
    write_png_impl(path, img, 16);
}

ImageF read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) fail(path, "cannot open for reading");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "png read error (garbled file?)");
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    // Normalize to 16-bit RGBA, composite below.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (bit_depth < 16) png_set_expand_16(png);
    png_set_add_alpha(png, 0xffff, PNG_FILLER_AFTER);
    png_read_update_info(png, info);

    std::vector<png_byte> raw(static_cast<size_t>(height) * width * 8);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * width * 8;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageF out;
    out.width = width;
    out.height = height;
    out.data.resize(static_cast<size_t>(width) * height * 3);
    for (size_t p = 0; p < static_cast<size_t>(width) * height; ++p) {
        const png_byte* px = raw.data() + p * 8;
        const double alpha = ((px[6] << 8) | px[7]) / 65535.0;
        for (int c = 0; c < 3; ++c) {
            const double v = ((px[2 * c] << 8) | px[2 * c + 1]) / 65535.0;
            out.data[3 * p + c] = static_cast<float>(v * alpha);  // over black
        }
    }
    return out;
}

}  // namespace splatlm::io
