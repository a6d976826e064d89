#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "qpat/errors.hpp"

namespace qpat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Sides of the rectangular domain, also used to index boundary faces.
enum class Side : int { South = 0, North = 1, West = 2, East = 3 };

constexpr std::array<Side, 4> all_sides = {Side::South, Side::North, Side::West, Side::East};

inline Vec2 outward_normal(Side s) {
    switch (s) {
        case Side::South: return {0.0, -1.0};
        case Side::North: return {0.0, 1.0};
        case Side::West: return {-1.0, 0.0};
        case Side::East: return {1.0, 0.0};
    }
    return {};
}

inline const char* side_name(Side s) {
    switch (s) {
        case Side::South: return "south";
        case Side::North: return "north";
        case Side::West: return "west";
        case Side::East: return "east";
    }
    return "?";
}

/// Uniform cell-centered grid on an axis-aligned rectangle.
///
/// Cell (i, j) has center (x0 + (i+1/2)hx, y0 + (j+1/2)hy); fields are
/// stored row-major with i fastest. `boundary_layer_delta` is the width of
/// the layer next to the boundary in which the absorption and scattering
/// coefficients are treated as known and frozen.
class SpatialGrid {
  public:
    SpatialGrid(int nx, int ny, double x0, double y0, double width, double height,
                double boundary_layer_delta = 0.0)
        : nx_(nx), ny_(ny), x0_(x0), y0_(y0), width_(width), height_(height),
          delta_(boundary_layer_delta) {
        if (nx < 3 || ny < 3) throw PreconditionError("grid: nx, ny must be >= 3");
        if (!(width > 0.0) || !(height > 0.0))
            throw PreconditionError("grid: width and height must be positive");
        hx_ = width / nx;
        hy_ = height / ny;
        if (delta_ < 0.0 || delta_ >= 0.5 * std::min(width, height))
            throw PreconditionError("grid: boundary_layer_delta must lie in [0, min(side)/2)");
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t n_cells() const { return static_cast<std::size_t>(nx_) * ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double h_max() const { return std::max(hx_, hy_); }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    double x1() const { return x0_ + width_; }
    double y1() const { return y0_ + height_; }
    double width() const { return width_; }
    double height() const { return height_; }
    double cell_area() const { return hx_ * hy_; }
    double area() const { return width_ * height_; }
    double diameter() const { return std::hypot(width_, height_); }
    double boundary_layer_delta() const { return delta_; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    double cx(int i) const { return x0_ + (i + 0.5) * hx_; }
    double cy(int j) const { return y0_ + (j + 0.5) * hy_; }
    Vec2 center(int i, int j) const { return {cx(i), cy(j)}; }

    bool contains(Vec2 p) const {
        return p.x >= x0_ - 1e-12 && p.x <= x1() + 1e-12 && p.y >= y0_ - 1e-12 &&
               p.y <= y1() + 1e-12;
    }

    /// Distance from cell center (i, j) to the nearest boundary point.
    double distance_to_boundary(int i, int j) const {
        const double dx = std::min(cx(i) - x0_, x1() - cx(i));
        const double dy = std::min(cy(j) - y0_, y1() - cy(j));
        return std::min(dx, dy);
    }

    /// True if the cell lies in the delta-vicinity of the boundary.
    bool in_boundary_layer(int i, int j) const {
        return distance_to_boundary(i, j) <= delta_ + 1e-14;
    }

    /// Number of boundary faces along a side (nx for S/N, ny for W/E).
    int n_faces(Side s) const {
        return (s == Side::South || s == Side::North) ? nx_ : ny_;
    }

    double face_length(Side s) const {
        return (s == Side::South || s == Side::North) ? hx_ : hy_;
    }

    /// Midpoint of boundary face `f` on side `s`.
    Vec2 face_center(Side s, int f) const {
        switch (s) {
            case Side::South: return {cx(f), y0_};
            case Side::North: return {cx(f), y1()};
            case Side::West: return {x0_, cy(f)};
            case Side::East: return {x1(), cy(f)};
        }
        return {};
    }

    /// Cell adjacent to boundary face `f` on side `s`.
    std::size_t face_cell(Side s, int f) const {
        switch (s) {
            case Side::South: return index(f, 0);
            case Side::North: return index(f, ny_ - 1);
            case Side::West: return index(0, f);
            case Side::East: return index(nx_ - 1, f);
        }
        return 0;
    }

    bool same_layout(const SpatialGrid& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && x0_ == o.x0_ && y0_ == o.y0_ &&
               width_ == o.width_ && height_ == o.height_;
    }

  private:
    int nx_, ny_;
    double x0_, y0_, width_, height_, delta_;
    double hx_, hy_;
};

/// Distance along -v from x to the boundary of the rectangle (backward exit
/// time tau_-). Zero when x already lies on the wall that -v points out of.
inline double boundary_distance(Vec2 x, Vec2 v, const SpatialGrid& g) {
    if (!g.contains(x)) throw PreconditionError("boundary_distance: point outside domain");
    double t = std::numeric_limits<double>::infinity();
    // Travel backward: p(t) = x - t v, t >= 0.
    if (v.x > 0.0) t = std::min(t, (x.x - g.x0()) / v.x);
    if (v.x < 0.0) t = std::min(t, (x.x - g.x1()) / v.x);
    if (v.y > 0.0) t = std::min(t, (x.y - g.y0()) / v.y);
    if (v.y < 0.0) t = std::min(t, (x.y - g.y1()) / v.y);
    if (!std::isfinite(t)) throw PreconditionError("boundary_distance: zero direction");
    return std::max(t, 0.0);
}

} // namespace qpat
