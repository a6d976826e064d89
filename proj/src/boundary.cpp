#include "qpat/boundary.hpp"

#include <cmath>
#include <limits>

namespace qpat {

BoundarySource::BoundarySource(const SpatialGrid& g, const AngularQuadrature& q)
    : grid_(&g), quad_(&q), nv_(q.n_dirs()) {
    for (Side s : all_sides) {
        values_[int(s)].assign(static_cast<std::size_t>(g.n_faces(s)) * nv_, 0.0);
        inflow_[int(s)].assign(nv_, 0);
        const Vec2 n = outward_normal(s);
        for (int k = 0; k < nv_; ++k) inflow_[int(s)][k] = dot(n, q.dir(k)) < 0.0;
    }
}

BoundarySource BoundarySource::constant(const SpatialGrid& g, const AngularQuadrature& q,
                                        double value) {
    BoundarySource b(g, q);
    for (Side s : all_sides)
        for (int f = 0; f < g.n_faces(s); ++f)
            for (int k = 0; k < q.n_dirs(); ++k)
                if (b.is_inflow(s, k)) b.at(s, f, k) = value;
    return b;
}

BoundarySource BoundarySource::from_function(const SpatialGrid& g, const AngularQuadrature& q,
                                             const std::function<double(Vec2, Vec2)>& f) {
    BoundarySource b(g, q);
    for (Side s : all_sides)
        for (int face = 0; face < g.n_faces(s); ++face)
            for (int k = 0; k < q.n_dirs(); ++k)
                if (b.is_inflow(s, k)) b.at(s, face, k) = f(g.face_center(s, face), q.dir(k));
    return b;
}

double BoundarySource::measure(Side s, int face, int k) const {
    if (!is_inflow(s, k)) return 0.0;
    (void)face;
    const double mu = std::abs(dot(outward_normal(s), quad_->dir(k)));
    return mu * grid_->face_length(s) * quad_->weight(k);
}

double BoundarySource::max_abs() const {
    double m = 0.0;
    for (Side s : all_sides)
        for (int f = 0; f < n_faces(s); ++f)
            for (int k = 0; k < nv_; ++k)
                if (is_inflow(s, k)) m = std::max(m, std::abs(at(s, f, k)));
    return m;
}

double BoundarySource::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (Side s : all_sides)
        for (int f = 0; f < n_faces(s); ++f)
            for (int k = 0; k < nv_; ++k)
                if (is_inflow(s, k)) m = std::min(m, at(s, f, k));
    return m;
}

std::size_t BoundarySource::n_inflow_pairs() const {
    std::size_t n = 0;
    for (Side s : all_sides)
        for (int k = 0; k < nv_; ++k)
            if (is_inflow(s, k)) n += n_faces(s);
    return n;
}

BoundarySource& BoundarySource::operator*=(double sc) {
    for (auto& side : values_)
        for (double& v : side) v *= sc;
    return *this;
}

DirichletTrace::DirichletTrace(const SpatialGrid& g, double value) {
    for (Side s : all_sides) values_[int(s)].assign(g.n_faces(s), value);
}

DirichletTrace DirichletTrace::from_function(const SpatialGrid& g,
                                             const std::function<double(Vec2)>& f) {
    DirichletTrace t(g);
    for (Side s : all_sides)
        for (int face = 0; face < g.n_faces(s); ++face)
            t.at(s, face) = f(g.face_center(s, face));
    return t;
}

double DirichletTrace::max_abs() const {
    double m = 0.0;
    for (const auto& side : values_)
        for (double v : side) m = std::max(m, std::abs(v));
    return m;
}

double DirichletTrace::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& side : values_)
        for (double v : side) m = std::min(m, v);
    return m;
}

DirichletTrace& DirichletTrace::operator*=(double sc) {
    for (auto& side : values_)
        for (double& v : side) v *= sc;
    return *this;
}

} // namespace qpat
