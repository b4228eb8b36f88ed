#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

// 6-D spatial vector algebra in Plücker coordinates, angular part first.
// Everything is templated on the scalar so the same kinematics code can be
// evaluated on complex inputs (complex-step differentiation of the mass
// matrix for the Christoffel-consistent Coriolis matrix).

namespace amble::spatial {

template <typename S> using Vec3T = Eigen::Matrix<S, 3, 1>;
template <typename S> using Mat3T = Eigen::Matrix<S, 3, 3>;
template <typename S> using Vec6T = Eigen::Matrix<S, 6, 1>;
template <typename S> using Mat6T = Eigen::Matrix<S, 6, 6>;

template <typename S>
Mat3T<S> skew(const Vec3T<S>& v)
{
    Mat3T<S> m;
    m << S(0), -v.z(), v.y(),
         v.z(), S(0), -v.x(),
        -v.y(), v.x(), S(0);
    return m;
}

/// Plain algebraic cross product. Eigen's cross() conjugates its result for
/// complex scalars, which would break complex-step differentiation.
template <typename S>
Vec3T<S> cross3(const Vec3T<S>& a, const Vec3T<S>& b)
{
    return Vec3T<S>(a.y() * b.z() - a.z() * b.y(),
                    a.z() * b.x() - a.x() * b.z(),
                    a.x() * b.y() - a.y() * b.x());
}

/// Rodrigues rotation about a unit axis; plain arithmetic so it stays
/// holomorphic in the angle.
template <typename S>
Mat3T<S> axisRotation(const Vec3T<S>& axis, const S& angle)
{
    using std::cos;
    using std::sin;
    const S c = cos(angle);
    const S s = sin(angle);
    Mat3T<S> r = c * Mat3T<S>::Identity()
               + s * skew<S>(axis)
               + (S(1) - c) * (axis * axis.transpose());
    return r;
}

/*!
 * Rigid transform between Plücker frames. Maps motion coordinates of the
 * parent frame into the child frame: E rotates parent coordinates into
 * child coordinates, r is the child origin expressed in the parent frame.
 */
template <typename S>
struct TransformT {
    Mat3T<S> rotation = Mat3T<S>::Identity(); // E
    Vec3T<S> translation = Vec3T<S>::Zero();  // r

    static TransformT identity() { return TransformT{}; }

    /// v_child = X * v_parent
    Vec6T<S> applyMotion(const Vec6T<S>& v) const
    {
        Vec6T<S> out;
        const Vec3T<S> w = v.template head<3>();
        out.template head<3>() = rotation * w;
        out.template tail<3>() =
            rotation * Vec3T<S>(v.template tail<3>() - cross3<S>(translation, w));
        return out;
    }

    /// f_parent = X^T * f_child (force covectors transform contravariantly)
    Vec6T<S> applyForceTranspose(const Vec6T<S>& f) const
    {
        Vec6T<S> out;
        const Vec3T<S> lin = rotation.transpose() * f.template tail<3>();
        out.template head<3>() =
            rotation.transpose() * f.template head<3>() + cross3<S>(translation, lin);
        out.template tail<3>() = lin;
        return out;
    }

    /// Composition: this after other (other: F0->F1, this: F1->F2, result F0->F2).
    TransformT compose(const TransformT& other) const
    {
        TransformT out;
        out.rotation = rotation * other.rotation;
        out.translation =
            other.translation + other.rotation.transpose() * translation;
        return out;
    }

    Mat6T<S> toMatrix() const
    {
        Mat6T<S> x = Mat6T<S>::Zero();
        x.template topLeftCorner<3, 3>() = rotation;
        x.template bottomRightCorner<3, 3>() = rotation;
        x.template bottomLeftCorner<3, 3>() = -rotation * skew<S>(translation);
        return x;
    }
};

/// Motion cross motion: v x m.
template <typename S>
Vec6T<S> crossMotion(const Vec6T<S>& v, const Vec6T<S>& m)
{
    Vec6T<S> out;
    const Vec3T<S> w = v.template head<3>();
    const Vec3T<S> v0 = v.template tail<3>();
    out.template head<3>() = cross3<S>(w, Vec3T<S>(m.template head<3>()));
    out.template tail<3>() = cross3<S>(v0, Vec3T<S>(m.template head<3>()))
                           + cross3<S>(w, Vec3T<S>(m.template tail<3>()));
    return out;
}

/// Motion cross force: v x* f.
template <typename S>
Vec6T<S> crossForce(const Vec6T<S>& v, const Vec6T<S>& f)
{
    Vec6T<S> out;
    const Vec3T<S> w = v.template head<3>();
    const Vec3T<S> v0 = v.template tail<3>();
    out.template head<3>() = cross3<S>(w, Vec3T<S>(f.template head<3>()))
                           + cross3<S>(v0, Vec3T<S>(f.template tail<3>()));
    out.template tail<3>() = cross3<S>(w, Vec3T<S>(f.template tail<3>()));
    return out;
}

/// Spatial inertia of a rigid body about the link-frame origin.
/// inertiaCom is the rotational inertia about the center of mass.
template <typename S>
Mat6T<S> spatialInertia(const S& mass, const Vec3T<S>& com,
                        const Mat3T<S>& inertiaCom)
{
    Mat6T<S> out;
    const Mat3T<S> cx = skew<S>(com);
    out.template topLeftCorner<3, 3>() =
        inertiaCom + mass * cx * cx.transpose();
    out.template topRightCorner<3, 3>() = mass * cx;
    out.template bottomLeftCorner<3, 3>() = mass * cx.transpose();
    out.template bottomRightCorner<3, 3>() = mass * Mat3T<S>::Identity();
    return out;
}

using Transform = TransformT<double>;

} // namespace amble::spatial
