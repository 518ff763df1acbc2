#include "gronav/render.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <zlib.h>

namespace gronav {

Image::Image(int w, int h, std::array<std::uint8_t, 3> fill) : width(w), height(h) {
    rgb.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill[0];
        rgb[i + 1] = fill[1];
        rgb[i + 2] = fill[2];
    }
}

void Image::set_pixel(int x, int y, std::array<std::uint8_t, 3> color) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = color[0];
    rgb[i + 1] = color[1];
    rgb[i + 2] = color[2];
}

void Image::fill_rect(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) set_pixel(x, y, color);
}

void Image::draw_disc(int cx, int cy, int radius, std::array<std::uint8_t, 3> color) {
    for (int y = cy - radius; y <= cy + radius; ++y)
        for (int x = cx - radius; x <= cx + radius; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
                set_pixel(x, y, color);
}

void Image::draw_circle(int cx, int cy, int radius, std::array<std::uint8_t, 3> color) {
    const int n = 8 * radius + 8;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * i / n;
        set_pixel(cx + static_cast<int>(std::lround(radius * std::cos(a))),
                  cy + static_cast<int>(std::lround(radius * std::sin(a))), color);
    }
}

void Image::draw_line(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set_pixel(x0, y0, color);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

namespace {

// 3x5 digit glyphs, row-major bits
constexpr std::uint16_t kDigits[10] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
};

}  // namespace

void Image::draw_number(int x, int y, int value, int scale, std::array<std::uint8_t, 3> color) {
    const std::string digits = std::to_string(value);
    int cursor = x;
    for (char ch : digits) {
        const std::uint16_t glyph = kDigits[ch - '0'];
        for (int row = 0; row < 5; ++row) {
            for (int col = 0; col < 3; ++col) {
                if (glyph & (1 << (14 - (row * 3 + col))))
                    fill_rect(cursor + col * scale, y + row * scale, cursor + (col + 1) * scale,
                              y + (row + 1) * scale, color);
            }
        }
        cursor += 4 * scale;
    }
}

void Image::draw_star(int cx, int cy, int radius, std::array<std::uint8_t, 3> color) {
    for (int k = 0; k < 5; ++k) {
        const double a = -M_PI / 2 + 2.0 * M_PI * k / 5.0;
        const double b = -M_PI / 2 + 2.0 * M_PI * (k + 2) / 5.0;
        draw_line(cx + static_cast<int>(std::lround(radius * std::cos(a))),
                  cy + static_cast<int>(std::lround(radius * std::sin(a))),
                  cx + static_cast<int>(std::lround(radius * std::cos(b))),
                  cy + static_cast<int>(std::lround(radius * std::sin(b))), color);
    }
}

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& data) {
    append_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    append_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    // filtered scanlines (filter type 0 per row)
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(image.height) * (1 + image.width * 3));
    for (int y = 0; y < image.height; ++y) {
        raw.push_back(0);
        const auto* row = image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3;
        raw.insert(raw.end(), row, row + image.width * 3);
    }
    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(),
                  static_cast<uLong>(raw.size()), Z_BEST_SPEED) != Z_OK)
        throw std::runtime_error("png encoding: deflate failed");
    compressed.resize(compressed_size);

    std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    append_u32(ihdr, static_cast<std::uint32_t>(image.width));
    append_u32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

void write_png(const std::string& path, const Image& image) {
    const auto bytes = encode_png(image);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

namespace {

// y axis points up in world coordinates, down in image coordinates
int to_px(double m, double resolution, int pixels_per_cell) {
    return static_cast<int>(std::lround(m / resolution * pixels_per_cell));
}

}  // namespace

Image render_aerial(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                    int pixels_per_cell) {
    Image img(grid.width * pixels_per_cell, grid.height * pixels_per_cell);
    for (int cy = 0; cy < grid.height; ++cy) {
        for (int cx = 0; cx < grid.width; ++cx) {
            const auto color = grid.obstacles[grid.index(cx, cy)]
                                   ? std::array<std::uint8_t, 3>{0, 0, 0}
                                   : classes[grid.cells[grid.index(cx, cy)]].appearance;
            const int py = (grid.height - 1 - cy) * pixels_per_cell;
            img.fill_rect(cx * pixels_per_cell, py, (cx + 1) * pixels_per_cell,
                          py + pixels_per_cell, color);
        }
    }
    return img;
}

Image render_marked_aerial(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                           const WaypointGraph& graph, int pixels_per_cell) {
    Image img = render_aerial(grid, classes, pixels_per_cell);
    const auto px = [&](Vec2 p) {
        return std::pair<int, int>{to_px(p.x, grid.resolution, pixels_per_cell),
                                   img.height - to_px(p.y, grid.resolution, pixels_per_cell)};
    };
    const int radius = std::max(4, pixels_per_cell * 2);
    for (int id = 1; id <= graph.size(); ++id) {
        const auto [x, y] = px(graph.position(id));
        img.draw_disc(x, y, radius, {255, 255, 255});
        img.draw_circle(x, y, radius, {0, 0, 0});
        // centered-ish digit block; anchor documented: marker center minus half glyph extent
        const int n_digits = static_cast<int>(std::to_string(id).size());
        img.draw_number(x - 2 * n_digits, y - 3, id, 1, {0, 0, 0});
    }
    const auto [sx, sy] = px(graph.position(graph.start_id));
    img.draw_star(sx, sy, radius + 3, {255, 200, 0});
    const auto [gx, gy] = px(graph.position(graph.goal_id));
    img.draw_star(gx, gy, radius + 3, {220, 0, 0});
    return img;
}

Image render_trajectories(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                          Vec2 start, Vec2 goal, const std::vector<TrajectoryOverlay>& overlays,
                          int pixels_per_cell) {
    Image img = render_aerial(grid, classes, pixels_per_cell);
    const auto px = [&](Vec2 p) {
        return std::pair<int, int>{to_px(p.x, grid.resolution, pixels_per_cell),
                                   img.height - to_px(p.y, grid.resolution, pixels_per_cell)};
    };
    for (const auto& overlay : overlays) {
        for (std::size_t i = 0; i + 1 < overlay.points.size(); ++i) {
            const auto [x0, y0] = px(overlay.points[i]);
            const auto [x1, y1] = px(overlay.points[i + 1]);
            img.draw_line(x0, y0, x1, y1, overlay.color);
        }
    }
    const auto [sx, sy] = px(start);
    img.draw_star(sx, sy, 10, {255, 200, 0});
    const auto [gx, gy] = px(goal);
    img.draw_star(gx, gy, 10, {220, 0, 0});
    return img;
}

Image render_patch(const PatchDescriptor& patch, int side_px) {
    std::array<std::uint8_t, 3> color{};
    for (int k = 0; k < 3; ++k)
        color[k] = static_cast<std::uint8_t>(std::clamp(patch.mean_appearance[k], 0.0, 255.0));
    return Image(side_px, side_px, color);
}

}  // namespace gronav
