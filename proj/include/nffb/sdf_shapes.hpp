#pragma once

#include "nffb/common.hpp"

#include <array>
#include <memory>
#include <string>

namespace nffb {

using Vec3d = std::array<double, 3>;

/// Exact signed distance oracle over [-1,1]^3 with direct surface sampling.
class SdfShape {
public:
    virtual ~SdfShape() = default;
    virtual double sdf(const Vec3d& p) const = 0;
    virtual Vec3d sample_surface(Pcg32& rng) const = 0;
    virtual double surface_area() const = 0;
};

class SphereSdf final : public SdfShape {
public:
    explicit SphereSdf(double radius, Vec3d center = {0, 0, 0});
    double sdf(const Vec3d& p) const override;
    Vec3d sample_surface(Pcg32& rng) const override;
    double surface_area() const override;

private:
    double radius_;
    Vec3d center_;
};

class BoxSdf final : public SdfShape {
public:
    explicit BoxSdf(Vec3d half_extent, Vec3d center = {0, 0, 0});
    double sdf(const Vec3d& p) const override;
    Vec3d sample_surface(Pcg32& rng) const override;
    double surface_area() const override;

private:
    Vec3d half_;
    Vec3d center_;
};

/// Torus around the y axis: major radius in the xz plane, minor radius of the
/// tube.
class TorusSdf final : public SdfShape {
public:
    TorusSdf(double major, double minor, Vec3d center = {0, 0, 0});
    double sdf(const Vec3d& p) const override;
    Vec3d sample_surface(Pcg32& rng) const override;
    double surface_area() const override;

private:
    double major_, minor_;
    Vec3d center_;
};

/// min() of two children: exact outside, a lower bound inside overlaps.
/// Surface sampling picks a child by area and rejects points that fall inside
/// the other child.
class UnionSdf final : public SdfShape {
public:
    UnionSdf(std::shared_ptr<SdfShape> a, std::shared_ptr<SdfShape> b);
    double sdf(const Vec3d& p) const override;
    Vec3d sample_surface(Pcg32& rng) const override;
    double surface_area() const override;

private:
    std::shared_ptr<SdfShape> a_, b_;
};

/// Named presets used by the CLI: sphere, box, torus, union2.
std::shared_ptr<SdfShape> make_shape(const std::string& name);

}  // namespace nffb
