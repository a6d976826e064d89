#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qpat/grid.hpp"

namespace qpat {

/// Spatial-only field, one value per cell (row-major, i fastest).
class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const SpatialGrid& g, double fill = 0.0)
        : nx_(g.nx()), ny_(g.ny()), values_(g.n_cells(), fill) {}
    ScalarField(int nx, int ny, double fill = 0.0)
        : nx_(nx), ny_(ny), values_(static_cast<std::size_t>(nx) * ny, fill) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t c) { return values_[c]; }
    double operator[](std::size_t c) const { return values_[c]; }
    double& at(int i, int j) { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool same_shape(const ScalarField& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    ScalarField& operator+=(const ScalarField& o) {
        for (std::size_t c = 0; c < values_.size(); ++c) values_[c] += o.values_[c];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        for (std::size_t c = 0; c < values_.size(); ++c) values_[c] -= o.values_[c];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    static ScalarField from_function(const SpatialGrid& g,
                                     const std::function<double(double, double)>& f) {
        ScalarField out(g);
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) out.at(i, j) = f(g.cx(i), g.cy(j));
        return out;
    }

  private:
    int nx_ = 0, ny_ = 0;
    std::vector<double> values_;
};

inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }

/// Angularly resolved field: one value per (cell, direction), direction
/// fastest. Cells follow the ScalarField ordering.
class PhaseField {
  public:
    PhaseField() = default;
    PhaseField(const SpatialGrid& g, int n_dirs, double fill = 0.0)
        : nx_(g.nx()), ny_(g.ny()), nv_(n_dirs),
          values_(g.n_cells() * static_cast<std::size_t>(n_dirs), fill) {}
    PhaseField(int nx, int ny, int n_dirs, double fill = 0.0)
        : nx_(nx), ny_(ny), nv_(n_dirs),
          values_(static_cast<std::size_t>(nx) * ny * n_dirs, fill) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int n_dirs() const { return nv_; }
    std::size_t size() const { return values_.size(); }
    std::size_t n_cells() const { return values_.size() / nv_; }

    double& operator()(std::size_t cell, int k) { return values_[cell * nv_ + k]; }
    double operator()(std::size_t cell, int k) const { return values_[cell * nv_ + k]; }
    double& at(int i, int j, int k) {
        return values_[(static_cast<std::size_t>(j) * nx_ + i) * nv_ + k];
    }
    double at(int i, int j, int k) const {
        return values_[(static_cast<std::size_t>(j) * nx_ + i) * nv_ + k];
    }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool same_shape(const PhaseField& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && nv_ == o.nv_;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }

    PhaseField& operator+=(const PhaseField& o) {
        for (std::size_t c = 0; c < values_.size(); ++c) values_[c] += o.values_[c];
        return *this;
    }
    PhaseField& operator-=(const PhaseField& o) {
        for (std::size_t c = 0; c < values_.size(); ++c) values_[c] -= o.values_[c];
        return *this;
    }
    PhaseField& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

  private:
    int nx_ = 0, ny_ = 0, nv_ = 0;
    std::vector<double> values_;
};

inline PhaseField operator-(PhaseField a, const PhaseField& b) { return a -= b; }
inline PhaseField operator+(PhaseField a, const PhaseField& b) { return a += b; }
inline PhaseField operator*(double s, PhaseField a) { return a *= s; }

/// Bilinear interpolation of a cell-centered field, clamped to constant
/// outside the ring of cell centers.
inline double interpolate(const ScalarField& f, const SpatialGrid& g, Vec2 p) {
    const double sx = (p.x - g.x0()) / g.hx() - 0.5;
    const double sy = (p.y - g.y0()) / g.hy() - 0.5;
    const double cxl = std::clamp(sx, 0.0, static_cast<double>(g.nx() - 1));
    const double cyl = std::clamp(sy, 0.0, static_cast<double>(g.ny() - 1));
    const int i0 = std::min(static_cast<int>(cxl), g.nx() - 2);
    const int j0 = std::min(static_cast<int>(cyl), g.ny() - 2);
    const double tx = cxl - i0;
    const double ty = cyl - j0;
    return (1 - tx) * (1 - ty) * f.at(i0, j0) + tx * (1 - ty) * f.at(i0 + 1, j0) +
           (1 - tx) * ty * f.at(i0, j0 + 1) + tx * ty * f.at(i0 + 1, j0 + 1);
}

} // namespace qpat
