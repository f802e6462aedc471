#include "edgepupil/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "edgepupil/error.hpp"

namespace fs = std::filesystem;

namespace edgepupil {

namespace {

std::string lower_ext(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in)
{
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty())
                break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

struct PgmHeader {
    int width = 0;
    int height = 0;
};

PgmHeader parse_pgm_header(std::istream& in, const fs::path& path)
{
    if (pgm_token(in) != "P5")
        throw FormatError(path.string() + ": not a binary PGM (P5)");
    PgmHeader hdr;
    int maxval = 0;
    try {
        hdr.width = std::stoi(pgm_token(in));
        hdr.height = std::stoi(pgm_token(in));
        maxval = std::stoi(pgm_token(in));
    } catch (const std::exception&) {
        throw FormatError(path.string() + ": malformed PGM header");
    }
    if (hdr.width <= 0 || hdr.height <= 0)
        throw FormatError(path.string() + ": non-positive PGM dimensions");
    if (maxval != 255)
        throw FormatError(path.string() + ": only 8-bit PGM (maxval 255) is supported, got " +
                          std::to_string(maxval));
    return hdr;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_png(const fs::path& path)
{
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f)
        throw IoError(path.string() + ": cannot open");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError(path.string() + ": not a PNG file");
    return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg)
{
    auto* where = static_cast<std::string*>(png_get_error_ptr(png));
    *where = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

GrayImage read_pgm(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path.string() + ": cannot open");
    const PgmHeader hdr = parse_pgm_header(in, path);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(hdr.width) * hdr.height);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size()))
        throw FormatError(path.string() + ": truncated PGM pixel data");
    return GrayImage(hdr.width, hdr.height, std::move(data));
}

// libpng reports errors through longjmp, so this function keeps only trivially
// destructible state alive across the setjmp boundary and builds the image
// after reading finishes.
GrayImage read_png(const fs::path& path)
{
    FilePtr f = open_png(path);
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
    if (!png)
        throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> buf;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": " + err);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16)
        png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3)
        png_error(png, "unsupported channel layout");
    buf.resize(static_cast<std::size_t>(width) * height * channels);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = buf.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels == 1)
        return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(buf));
    return to_grayscale(RgbImage{static_cast<int>(width), static_cast<int>(height), std::move(buf)});
}

GrayImage read_image(const fs::path& path)
{
    const std::string ext = lower_ext(path);
    if (ext == ".pgm")
        return read_pgm(path);
    if (ext == ".png")
        return read_png(path);
    throw FormatError(path.string() + ": unsupported image extension (expected .pgm or .png)");
}

ImageSize read_image_size(const fs::path& path)
{
    const std::string ext = lower_ext(path);
    if (ext == ".pgm") {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError(path.string() + ": cannot open");
        const PgmHeader hdr = parse_pgm_header(in, path);
        return {hdr.width, hdr.height};
    }
    if (ext == ".png") {
        FilePtr f = open_png(path);
        // IHDR: 4-byte length, "IHDR", then big-endian width and height.
        unsigned char ihdr[16];
        if (std::fread(ihdr, 1, 16, f.get()) != 16 || std::string(reinterpret_cast<char*>(ihdr + 4), 4) != "IHDR")
            throw FormatError(path.string() + ": missing IHDR chunk");
        auto be32 = [](const unsigned char* p) {
            return static_cast<int>((static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
                                    (static_cast<std::uint32_t>(p[2]) << 8) | p[3]);
        };
        return {be32(ihdr + 8), be32(ihdr + 12)};
    }
    throw FormatError(path.string() + ": unsupported image extension (expected .pgm or .png)");
}

void write_pgm(const fs::path& path, const GrayImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path.string() + ": cannot open for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()), static_cast<std::streamsize>(img.size()));
    if (!out)
        throw IoError(path.string() + ": write failed");
}

std::vector<fs::path> list_frames(const fs::path& dir)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError(dir.string() + ": not a directory");
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string ext = lower_ext(entry.path());
        if (ext == ".png" || ext == ".pgm")
            frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return frames;
}

}  // namespace edgepupil
