#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gronav/global_planner.hpp"
#include "gronav/world.hpp"

namespace gronav {

struct Image {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    Image(int w, int h, std::array<std::uint8_t, 3> fill = {255, 255, 255});

    void set_pixel(int x, int y, std::array<std::uint8_t, 3> color);
    void fill_rect(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color);
    void draw_disc(int cx, int cy, int radius, std::array<std::uint8_t, 3> color);
    void draw_circle(int cx, int cy, int radius, std::array<std::uint8_t, 3> color);
    void draw_line(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color);
    /// 3x5 bitmap digits scaled by `scale`, anchored at the top-left corner.
    void draw_number(int x, int y, int value, int scale, std::array<std::uint8_t, 3> color);
    void draw_star(int cx, int cy, int radius, std::array<std::uint8_t, 3> color);
};

std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const std::string& path, const Image& image);

/// Colored render of the grid: one block per cell, obstacles in black.
Image render_aerial(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                    int pixels_per_cell = 6);

/// Aerial render with numbered marker circles plus start/goal stars.
Image render_marked_aerial(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                           const WaypointGraph& graph, int pixels_per_cell = 6);

/// Trajectories over the aerial render, one color per named path.
struct TrajectoryOverlay {
    std::string name;
    std::array<std::uint8_t, 3> color;
    std::vector<Vec2> points;
};

Image render_trajectories(const WorldGrid& grid, const std::vector<TerrainClass>& classes,
                          Vec2 start, Vec2 goal, const std::vector<TrajectoryOverlay>& overlays,
                          int pixels_per_cell = 6);

/// Solid-color thumbnail for a patch descriptor (remote-backend exemplars).
Image render_patch(const PatchDescriptor& patch, int side_px = 32);

}  // namespace gronav
