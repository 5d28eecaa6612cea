#pragma once
/**
 * @file bundle.hpp
 * @brief Trivialized metric bundles, involutive boundary operators and
 *        (B-)path-ordered exponentials along reflected paths.
 *
 * Bundles are globally trivial, R^k or C^k, with connection nabla = d + A.
 * Along a path the path-ordered exponential solves
 *
 *     P'(s) = (V(gamma(s)) - A(gamma(s), gamma'(s))) P(s),   P(0) = I,
 *
 * and its inverse Q = P^{-1} solves Q' = -Q (V - A(gamma')) with Q(0) = I.
 * At every reflection the constant boundary operator B is inserted.
 */

#include "heatpath/billiard.hpp"
#include "heatpath/descriptor.hpp"
#include "heatpath/geometry.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace heatpath {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct Connection {
    Descriptor descriptor{"zero", {}};
    bool is_zero = true;
    /// sup ||A(x, xi)|| / |xi|
    double bound_per_speed = 0.0;
    /// Writes A(x, xi) into a pre-sized k x k matrix.
    std::function<void(const Vec& x, const Vec& xi, Matrix& out)> eval;
};

struct Potential {
    Descriptor descriptor{"zero", {}};
    bool is_zero = true;
    /// Analytic bound on sup ||V(x)||.
    double sup_norm = 0.0;
    /// Writes V(x) into a pre-sized k x k matrix.
    std::function<void(const Vec& x, Matrix& out)> eval;
};

/// Registry: zero, circle-holonomy(c), u1(c), offdiag(c), su2(c).
Connection make_connection(const Descriptor& d, int rank, bool complex_field, const GeometryModel& g);
/// Registry: zero, constant(a), diagonal(a1,..,ak), cosine-well(a), coupled(a,b,c).
Potential make_potential(const Descriptor& d, int rank);

struct BundleSpec {
    int rank = 1;
    bool complex_field = false;
    Connection connection;
    Potential potential;
    double alpha = 0.0;

    bool is_scalar() const { return rank == 1; }
    bool is_flat_trivial() const { return connection.is_zero && potential.is_zero; }
};

BundleSpec make_bundle(int rank, bool complex_field, Connection connection, Potential potential, double alpha);

struct BundleValidation {
    double max_skew_violation = 0.0;
    double max_symmetry_violation = 0.0;
    double sampled_potential_sup = 0.0;
    bool alpha_covers_potential = true;
    bool valid = true;
};

/// Samples positions (and unit tangent vectors) in the closure of g.
BundleValidation validate_bundle(const BundleSpec& b, const GeometryModel& g, std::uint64_t seed = 7,
                                 int samples = 1000);

enum class BoundaryPreset { dirichlet, neumann, blockwise, custom };

class BoundaryOperator {
public:
    static BoundaryOperator dirichlet(int rank);
    static BoundaryOperator neumann(int rank);
    static BoundaryOperator blockwise(const std::vector<int>& signs);
    /// Arbitrary constant matrix; rejected unless it is a symmetric involution.
    static BoundaryOperator custom(const Matrix& b);

    const Matrix& matrix() const { return b_; }
    BoundaryPreset preset() const { return preset_; }
    int rank() const { return static_cast<int>(b_.rows()); }
    /// Projector onto W+ (Neumann-type part) and W- (Dirichlet-type part).
    Matrix projector_plus() const;
    Matrix projector_minus() const;
    /// +1 or -1 when B is a multiple of the identity, 0 otherwise.
    int scalar_sign() const { return scalar_sign_; }
    std::string descriptor() const;

private:
    Matrix b_;
    BoundaryPreset preset_ = BoundaryPreset::neumann;
    std::vector<int> signs_;
    int scalar_sign_ = 1;
};

/// Registry: dirichlet, neumann, blockwise(s1,..,sk).
BoundaryOperator make_boundary_operator(const Descriptor& d, int rank);

struct BoundaryValidation {
    bool valid = true;
    double involution_error = 0.0;
    double symmetry_error = 0.0;
    double projector_error = 0.0;
    double max_commutator = 0.0;
    std::string note;
};

BoundaryValidation validate_boundary_operator(const BundleSpec& b, const BoundaryOperator& B,
                                              const GeometryModel& g, std::uint64_t seed = 11,
                                              int samples = 1000);

struct TransportResult {
    Matrix P;
    Matrix P_inv;
    int b_insertions = 0;
};

/// Number of equal substeps used on a segment: h <= min(duration, 0.01/(alpha + |A| speed + 1)),
/// multiplied by `refinement`.
int transport_substeps(const BundleSpec& b, double speed, double duration, int refinement = 1);

/// P over one geodesic segment by classical RK4.
Matrix transport_segment(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg, int refinement = 1);
/// Closed form exp(int (V - A(gamma'))) for rank-1 bundles, Simpson quadrature with the same substeps.
Complex transport_segment_scalar(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg,
                                 int refinement = 1);

/// P_B(gamma) and its inverse, the latter integrated from the Q equation.
TransportResult b_transport(const BundleSpec& b, const BoundaryOperator& B, const GeometryModel& g,
                            const ReflectedPath& path, int refinement = 1);

/// Accumulates P_B^{-1} over consecutive reflected pieces without allocating.
/// Rank-1 bundles use the closed form.
class InverseTransport {
public:
    InverseTransport(const BundleSpec& b, const BoundaryOperator& B, const GeometryModel& g);

    void reset();
    /// Q <- Q * P_B(piece)^{-1}; pieces must be applied in time order.
    void apply(const ReflectedPath& piece);
    /// Current P_B^{-1}.
    const Matrix& value();
    /// Operator norm of the current P_B^{-1}.
    double norm();
    /// Q * u for a section value u.
    void apply_to(const CVector& u, CVector& out);

private:
    void segment_inverse(const PathSegment& seg);

    const BundleSpec& bundle_;
    const BoundaryOperator& boundary_;
    const GeometryModel& geometry_;
    bool scalar_;
    Complex q_scalar_ = 1.0;
    Complex b_scalar_ = 1.0;
    Matrix q_, f0_, fm_, f1_, k1_, k2_, k3_, k4_, tmp_, a_, v_;
};

}  // namespace heatpath
