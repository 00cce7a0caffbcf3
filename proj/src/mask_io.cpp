#include "mfloc/mask_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace mfloc {

namespace fs = std::filesystem;

namespace {

using Bytes = std::vector<unsigned char>;

struct Gray8 {
    Index height = 0;
    Index width = 0;
    Bytes pixels;
};

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
    throw IoError(path.string() + ": " + what);
}

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Gray8 read_png(const fs::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) io_fail(path, "cannot open file");
    unsigned char signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        io_fail(path, "not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail(path, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        io_fail(path, "libpng initialization failed");
    }
    Gray8 image;
    std::string error;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        io_fail(path, "corrupt PNG data");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY || channels != 1) {
        error = "expected a single-channel grayscale mask, found " + std::to_string(channels) + " channels";
    } else if (bit_depth != 8) {
        error = "unsupported bit depth " + std::to_string(bit_depth) + " (expected 8)";
    } else {
        image.height = png_get_image_height(png, info);
        image.width = png_get_image_width(png, info);
        image.pixels.resize(static_cast<std::size_t>(image.height * image.width));
        std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
        for (Index y = 0; y < image.height; ++y) rows[static_cast<std::size_t>(y)] = image.pixels.data() + y * image.width;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!error.empty()) io_fail(path, error);
    return image;
}

void write_png(const Gray8& image, const fs::path& path) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) io_fail(path, "cannot open file for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail(path, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        io_fail(path, "libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        io_fail(path, "PNG write failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (Index y = 0; y < image.height; ++y) {
        png_write_row(png, image.pixels.data() + y * image.width);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string token;
    char c = 0;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!token.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) break;
            continue;
        }
        token.push_back(c);
    }
    return token;
}

Gray8 read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open file");
    const std::string magic = pgm_token(in);
    if (magic == "P3" || magic == "P6") io_fail(path, "expected a single-channel grayscale mask, found 3 channels");
    if (magic != "P2" && magic != "P5") io_fail(path, "not a PGM file");
    Gray8 image;
    long maxval = 0;
    try {
        image.width = std::stol(pgm_token(in));
        image.height = std::stol(pgm_token(in));
        maxval = std::stol(pgm_token(in));
    } catch (const std::exception&) {
        io_fail(path, "malformed PGM header");
    }
    if (image.width <= 0 || image.height <= 0) io_fail(path, "malformed PGM header");
    if (maxval != 255) io_fail(path, "unsupported bit depth (maxval " + std::to_string(maxval) + ", expected 255)");

    image.pixels.resize(static_cast<std::size_t>(image.width * image.height));
    if (magic == "P5") {
        in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) io_fail(path, "truncated PGM data");
    } else {
        for (auto& p : image.pixels) {
            long v = -1;
            if (!(in >> v) || v < 0 || v > 255) io_fail(path, "malformed ASCII PGM data");
            p = static_cast<unsigned char>(v);
        }
    }
    return image;
}

void write_pgm(const Gray8& image, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open file for writing");
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) io_fail(path, "write failed");
}

Gray8 read_gray(const fs::path& path) {
    if (!fs::exists(path)) io_fail(path, "file does not exist");
    const std::string ext = lower_extension(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pgm(path);
    return read_png(path);
}

void write_gray(const Gray8& image, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    if (lower_extension(path) == ".pgm") {
        write_pgm(image, path);
    } else {
        write_png(image, path);
    }
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

TensorD load_probability_map(const fs::path& path) {
    const Gray8 image = read_gray(path);
    TensorD map(Shape{image.height, image.width});
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        map.data()[static_cast<Index>(i)] = static_cast<double>(image.pixels[i]) / 255.0;
    }
    return map;
}

BinaryMask load_mask(const fs::path& path, double threshold) { return binarize(load_probability_map(path), threshold); }

void save_mask(const BinaryMask& mask, const fs::path& path) {
    Gray8 image{mask.height(), mask.width(), Bytes(static_cast<std::size_t>(mask.area()))};
    for (Index i = 0; i < mask.area(); ++i) image.pixels[static_cast<std::size_t>(i)] = mask.bits().data()[i] ? 255 : 0;
    write_gray(image, path);
}

void save_probability_map(const TensorD& map, const fs::path& path) {
    if (map.rank() != 2) throw DimensionError("save_probability_map expects [H,W]");
    Gray8 image{map.height(), map.width(), Bytes(static_cast<std::size_t>(map.size()))};
    for (Index i = 0; i < map.size(); ++i) {
        const double v = std::clamp(map.data()[i], 0.0, 1.0);
        image.pixels[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    write_gray(image, path);
}

bool is_mask_file(const fs::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".png" || ext == ".pgm";
}

std::vector<fs::path> list_mask_files(const fs::path& dir_or_file) {
    if (!fs::exists(dir_or_file)) io_fail(dir_or_file, "path does not exist");
    if (!fs::is_directory(dir_or_file)) return {dir_or_file};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_or_file)) {
        if (entry.is_regular_file() && is_mask_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<DetectionSample> load_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in) io_fail(path, "cannot open scores file");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "id,score,label") {
        io_fail(path, "scores CSV must start with the header 'id,score,label'");
    }
    std::vector<DetectionSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        std::stringstream fields(line);
        std::string id, score, label;
        if (!std::getline(fields, id, ',') || !std::getline(fields, score, ',') || !std::getline(fields, label)) {
            io_fail(path, "line " + std::to_string(line_no) + ": expected id,score,label");
        }
        DetectionSample s;
        s.id = trim(id);
        try {
            std::size_t used = 0;
            s.score = std::stod(trim(score), &used);
            s.label = std::stoi(trim(label));
        } catch (const std::exception&) {
            io_fail(path, "line " + std::to_string(line_no) + ": malformed number");
        }
        if (s.label != 0 && s.label != 1) io_fail(path, "line " + std::to_string(line_no) + ": label must be 0 or 1");
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_scores(const std::vector<DetectionSample>& samples, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) io_fail(path, "cannot open scores file for writing");
    out << "id,score,label\n";
    char buffer[64];
    for (const auto& s : samples) {
        std::snprintf(buffer, sizeof buffer, "%.6f", s.score);
        out << s.id << ',' << buffer << ',' << s.label << '\n';
    }
    if (!out) io_fail(path, "write failed");
}

}  // namespace mfloc
