#include "flowgest/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "flowgest/error.hpp"

namespace flowgest {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail("cannot open '" + path + "'");
    return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    auto* jb = static_cast<std::jmp_buf*>(png_get_error_ptr(png));
    (void)msg;
    std::longjmp(*jb, 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

Image8 read_png_file(FILE* f, const std::string& path) {
    std::jmp_buf jb;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &jb, png_error_fn, png_warn_fn);
    if (!png) fail("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail("libpng init failed");
    }
    Image8 img;
    std::vector<png_bytep> rows;
    if (setjmp(jb)) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("corrupt PNG file '" + path + "'");
    }
    png_init_io(png, f);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail("unsupported PNG channel count in '" + path + "'");
    }
    img = Image8(static_cast<int>(w), static_cast<int>(h), channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.px.data() + static_cast<size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jb;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jb, 1);
}

Image8 read_jpeg_file(FILE* f, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jb)) {
        jpeg_destroy_decompress(&cinfo);
        fail("corrupt JPEG file '" + path + "'");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    int channels = cinfo.output_components;
    Image8 img(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height), channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.px.data() +
                       static_cast<size_t>(cinfo.output_scanline) * img.width * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

}  // namespace

Image8 read_image(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char magic[4] = {0, 0, 0, 0};
    size_t got = std::fread(magic, 1, 4, f.get());
    if (got < 2) fail("truncated image file '" + path + "'");
    std::rewind(f.get());
    if (magic[0] == 0x89 && magic[1] == 'P') return read_png_file(f.get(), path);
    if (magic[0] == 0xFF && magic[1] == 0xD8) return read_jpeg_file(f.get(), path);
    fail("'" + path + "' is neither PNG nor JPEG");
}

void write_png(const Image8& img, const std::string& path) {
    FilePtr f = open_file(path, "wb");
    std::jmp_buf jb;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &jb, png_error_fn, png_warn_fn);
    if (!png) fail("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail("libpng init failed");
    }
    if (setjmp(jb)) {
        png_destroy_write_struct(&png, &info);
        fail("PNG write failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_compression_level(png, 1);
    int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.width, img.height, 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, const_cast<png_bytep>(
            img.px.data() + static_cast<size_t>(y) * img.width * img.channels));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_jpeg(const Image8& img, const std::string& path, int quality) {
    if (quality < 1 || quality > 100) fail("JPEG quality must be in 1..100");
    FilePtr f = open_file(path, "wb");
    jpeg_compress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jb)) {
        jpeg_destroy_compress(&cinfo);
        fail("JPEG write failed for '" + path + "'");
    }
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, f.get());
    cinfo.image_width = img.width;
    cinfo.image_height = img.height;
    cinfo.input_components = img.channels;
    cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(
            img.px.data() + static_cast<size_t>(cinfo.next_scanline) * img.width * img.channels);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
}

}  // namespace flowgest
