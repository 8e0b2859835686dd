#include "uaweight/image.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <jerror.h>
#include <png.h>

#include "uaweight/error.hpp"
#include "uaweight/text_io.hpp"

namespace uaweight {

namespace {

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string message = image.message;
    png_image_free(&image);
    fail(ErrorCode::UndecodableImage, "PNG header: " + message);
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    fail(ErrorCode::ZeroPixelImage, "PNG has zero pixels");
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(image.width, image.height);
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    fail(ErrorCode::UndecodableImage, "PNG data: " + message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
  bool truncated;
};

void jpeg_error_exit(j_common_ptr info) {
  auto* manager = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, manager->message);
  std::longjmp(manager->jump, 1);
}

// Warnings stay quiet, except that a truncated stream (which libjpeg pads
// with gray) is remembered and rejected once decoding ends.
void jpeg_emit_message(j_common_ptr info, int level) {
  if (level < 0 && info->err->msg_code == JWRN_JPEG_EOF) {
    reinterpret_cast<JpegErrorManager*>(info->err)->truncated = true;
  }
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  RgbImage out;
  jpeg_decompress_struct info;
  JpegErrorManager errors;
  info.err = jpeg_std_error(&errors.base);
  errors.base.error_exit = jpeg_error_exit;
  errors.base.emit_message = jpeg_emit_message;
  errors.message[0] = '\0';
  errors.truncated = false;

  if (setjmp(errors.jump)) {
    jpeg_destroy_decompress(&info);
    fail(ErrorCode::UndecodableImage, std::string("JPEG: ") + errors.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  if (info.output_width == 0 || info.output_height == 0) {
    jpeg_destroy_decompress(&info);
    fail(ErrorCode::ZeroPixelImage, "JPEG has zero pixels");
  }
  out.width = info.output_width;
  out.height = info.output_height;
  out.pixels.resize(out.width * out.height * 3);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = out.pixels.data() + static_cast<std::size_t>(info.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  if (errors.truncated) fail(ErrorCode::UndecodableImage, "JPEG: premature end of data");
  return out;
}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  fail(ErrorCode::UndecodableImage, "unrecognized image signature (expected PNG or JPEG)");
}

RgbImage read_image(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  try {
    return decode_image({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

DecodedLuma luma_from_rgb(const RgbImage& image) {
  if (image.width == 0 || image.height == 0) fail(ErrorCode::ZeroPixelImage, "image has zero pixels");
  DecodedLuma out;
  out.luma.width = image.width;
  out.luma.height = image.height;
  const std::size_t n = image.width * image.height;
  out.luma.values.resize(n);
  std::array<double, 3> sums{};
  for (std::size_t i = 0; i < n; ++i) {
    const double r = image.pixels[3 * i];
    const double g = image.pixels[3 * i + 1];
    const double b = image.pixels[3 * i + 2];
    out.luma.values[i] = 0.299 * r + 0.587 * g + 0.114 * b;
    sums[0] += r;
    sums[1] += g;
    sums[2] += b;
  }
  for (std::size_t c = 0; c < 3; ++c) out.channel_means[c] = sums[c] / static_cast<double>(n);
  return out;
}

DecodedLuma decode_luma(std::span<const std::uint8_t> bytes) { return luma_from_rgb(decode_image(bytes)); }

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.width == 0 || image.height == 0) fail(ErrorCode::ZeroPixelImage, "cannot encode an empty image");
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("PNG encode: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("PNG encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  const auto bytes = encode_png(image);
  write_file(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

}  // namespace uaweight
