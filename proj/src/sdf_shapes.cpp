#include "nffb/sdf_shapes.hpp"

#include <algorithm>
#include <cmath>

namespace nffb {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3d sub(const Vec3d& a, const Vec3d& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double norm(const Vec3d& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

SphereSdf::SphereSdf(double radius, Vec3d center) : radius_(radius), center_(center) {
    if (!(radius > 0)) throw ConfigError("sphere: radius must be positive");
}

double SphereSdf::sdf(const Vec3d& p) const { return norm(sub(p, center_)) - radius_; }

Vec3d SphereSdf::sample_surface(Pcg32& rng) const {
    Vec3d d;
    double n;
    do {
        d = {rng.normal(), rng.normal(), rng.normal()};
        n = norm(d);
    } while (n < 1e-12);
    return {center_[0] + radius_ * d[0] / n, center_[1] + radius_ * d[1] / n,
            center_[2] + radius_ * d[2] / n};
}

double SphereSdf::surface_area() const { return 4.0 * kPi * radius_ * radius_; }

BoxSdf::BoxSdf(Vec3d half_extent, Vec3d center) : half_(half_extent), center_(center) {
    for (double h : half_)
        if (!(h > 0)) throw ConfigError("box: half extents must be positive");
}

double BoxSdf::sdf(const Vec3d& p) const {
    Vec3d d = sub(p, center_);
    Vec3d q = {std::abs(d[0]) - half_[0], std::abs(d[1]) - half_[1], std::abs(d[2]) - half_[2]};
    double outside = std::sqrt(std::pow(std::max(q[0], 0.0), 2) +
                               std::pow(std::max(q[1], 0.0), 2) +
                               std::pow(std::max(q[2], 0.0), 2));
    double inside = std::min(std::max({q[0], q[1], q[2]}), 0.0);
    return outside + inside;
}

Vec3d BoxSdf::sample_surface(Pcg32& rng) const {
    // Pick a face pair by area, then a sign and a uniform point on the face.
    double ax = half_[1] * half_[2];
    double ay = half_[0] * half_[2];
    double az = half_[0] * half_[1];
    double pick = rng.uniform(0.0, ax + ay + az);
    int axis = pick < ax ? 0 : (pick < ax + ay ? 1 : 2);
    double sign = rng.next_u32() & 1u ? 1.0 : -1.0;
    Vec3d p = center_;
    for (int d = 0; d < 3; ++d)
        p[d] += d == axis ? sign * half_[d] : rng.uniform(-half_[d], half_[d]);
    return p;
}

double BoxSdf::surface_area() const {
    return 8.0 * (half_[0] * half_[1] + half_[1] * half_[2] + half_[2] * half_[0]);
}

TorusSdf::TorusSdf(double major, double minor, Vec3d center)
    : major_(major), minor_(minor), center_(center) {
    if (!(major > 0) || !(minor > 0) || !(minor < major))
        throw ConfigError("torus: need 0 < minor < major");
}

double TorusSdf::sdf(const Vec3d& p) const {
    Vec3d d = sub(p, center_);
    double qx = std::sqrt(d[0] * d[0] + d[2] * d[2]) - major_;
    return std::sqrt(qx * qx + d[1] * d[1]) - minor_;
}

Vec3d TorusSdf::sample_surface(Pcg32& rng) const {
    double theta = rng.uniform(0.0, 2.0 * kPi);
    // Tube angle weighted by the local ring circumference.
    double phi;
    do {
        phi = rng.uniform(0.0, 2.0 * kPi);
    } while (rng.uniform(0.0, major_ + minor_) > major_ + minor_ * std::cos(phi));
    double ring = major_ + minor_ * std::cos(phi);
    return {center_[0] + ring * std::cos(theta), center_[1] + minor_ * std::sin(phi),
            center_[2] + ring * std::sin(theta)};
}

double TorusSdf::surface_area() const { return 4.0 * kPi * kPi * major_ * minor_; }

UnionSdf::UnionSdf(std::shared_ptr<SdfShape> a, std::shared_ptr<SdfShape> b)
    : a_(std::move(a)), b_(std::move(b)) {
    if (!a_ || !b_) throw ConfigError("union: null child");
}

double UnionSdf::sdf(const Vec3d& p) const { return std::min(a_->sdf(p), b_->sdf(p)); }

Vec3d UnionSdf::sample_surface(Pcg32& rng) const {
    for (int tries = 0; tries < 10000; ++tries) {
        double wa = a_->surface_area();
        bool from_a = rng.uniform(0.0, wa + b_->surface_area()) < wa;
        const SdfShape& own = from_a ? *a_ : *b_;
        const SdfShape& other = from_a ? *b_ : *a_;
        Vec3d p = own.sample_surface(rng);
        if (other.sdf(p) > 1e-12) return p;
    }
    throw NumericsError("union surface sampling: rejection did not terminate");
}

double UnionSdf::surface_area() const { return a_->surface_area() + b_->surface_area(); }

std::shared_ptr<SdfShape> make_shape(const std::string& name) {
    if (name == "sphere") return std::make_shared<SphereSdf>(0.5);
    if (name == "box") return std::make_shared<BoxSdf>(Vec3d{0.5, 0.35, 0.25});
    if (name == "torus") return std::make_shared<TorusSdf>(0.5, 0.2);
    if (name == "union2")
        return std::make_shared<UnionSdf>(
            std::make_shared<SphereSdf>(0.35, Vec3d{-0.3, 0.0, 0.0}),
            std::make_shared<BoxSdf>(Vec3d{0.3, 0.2, 0.2}, Vec3d{0.3, 0.0, 0.0}));
    throw ConfigError("unknown shape: " + name + " (expected sphere|box|torus|union2)");
}

}  // namespace nffb
