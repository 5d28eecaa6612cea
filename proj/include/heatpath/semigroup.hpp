#pragma once
/**
 * @file semigroup.hpp
 * @brief Time-sliced approximation P_tau of the heat semigroup.
 *
 * For a partition 0 = tau_0 < ... < tau_N = t, one Monte Carlo sample is a
 * piecewise reflected geodesic starting at x: on the j-th slice the velocity
 * is drawn from the centred Gaussian with covariance (2 / dtau_j) I, i.e. the
 * density (dtau_j / 4 pi)^{n/2} exp(-dtau_j |v|^2 / 4), and the path is traced
 * for time dtau_j from where the previous slice ended. The sample value is
 * P_B(gamma)^{-1} u(gamma(t)). Averaging gives an unbiased estimate of P_tau u(x).
 *
 * Samples are grouped in fixed chunks, each sample owns a Philox stream keyed
 * by its index, and chunk statistics are merged in chunk order, so the result
 * does not depend on the number of workers.
 */

#include "heatpath/billiard.hpp"
#include "heatpath/bundle.hpp"
#include "heatpath/geometry.hpp"
#include "heatpath/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace heatpath {

class Partition {
public:
    explicit Partition(std::vector<double> times);
    static Partition uniform(double t, int n);

    const std::vector<double>& times() const { return times_; }
    int size() const { return static_cast<int>(times_.size()) - 1; }
    double step(int j) const { return times_[j + 1] - times_[j]; }
    double mesh() const;
    double total() const { return times_.back(); }
    /// tau * tau': slices of `other` appended after this partition.
    Partition concatenate(const Partition& other) const;

private:
    std::vector<double> times_;
};

struct FieldSection {
    Descriptor descriptor{"const", {1.0}};
    int rank = 1;
    bool complex_valued = false;
    /// Declared bound on sup |u(x)|.
    double sup_norm = 1.0;
    std::function<void(const Vec& x, CVector& out)> eval;

    CVector operator()(const Vec& x) const;
};

/// Registry: const(c), sin(k), cos(k), sine-series(c1,..,cn), expi(k),
/// sphere-l1(a,b,c), torus-cos(k1,k2), gauss(x0,x1,width).
/// Scalar profiles are replicated across the `rank` components.
FieldSection make_section(const Descriptor& d, int rank, const GeometryModel& g);

/// Velocity coordinates with i.i.d. N(0, 2/dtau) components in R^dim.
Vec sample_segment_velocity(int dim, double dtau, PhiloxStream& rng);

struct EstimateOptions {
    std::uint64_t seed = 1;
    long samples = 1000;
    int workers = 1;
    /// Pair v with Rv at boundary starts (ignored elsewhere). Each pair counts as two samples.
    bool antithetic = false;
    int max_reflections = kAutoReflectionCap;
};

struct SliceEstimate {
    CVector value;
    Eigen::VectorXd stderr_re;
    Eigen::VectorXd stderr_im;
    long samples_used = 0;
    long rejected = 0;
    std::uint64_t seed = 0;
    bool rejection_warning = false;
    /// Largest ||P_B(gamma)^{-1}|| seen over accepted samples.
    double max_weight_norm = 0.0;
};

/// Draws one sample path and returns its weighted endpoint value. Holds the
/// scratch storage for a single worker.
class PathSampler {
public:
    PathSampler(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B, const FieldSection& u,
                int max_reflections = kAutoReflectionCap);

    /// Draw the Gaussian coordinates for all slices from `rng` (2 per slice).
    void draw(const Partition& tau, PhiloxStream& rng);
    /// Evaluate the drawn path from x; `reflect_first` replaces the first
    /// velocity v by Rv (boundary starts only). Returns false if rejected.
    bool evaluate(const Vec& x, const Partition& tau, bool reflect_first, CVector& out);
    double last_weight_norm() const { return weight_norm_; }
    const ReflectedPath& last_piece() const { return piece_; }

private:
    const GeometryModel& g_;
    const BundleSpec& b_;
    const FieldSection& u_;
    int max_reflections_;
    InverseTransport transport_;
    ReflectedPath piece_;
    std::vector<double> coords_;
    CVector u_val_;
    double weight_norm_ = 0.0;
};

SliceEstimate estimate_slice(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                             const FieldSection& u, const Vec& x, const Partition& tau,
                             const EstimateOptions& opts);

/// Deterministic single-step P_t u(x) on a 1-D model by Gauss-Hermite quadrature
/// over the velocity (at least 64 nodes).
CVector quadrature_step_1d(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                           const FieldSection& u, const Vec& x, double t, int nodes = 96);

/// Gauss-Hermite nodes/weights for the weight exp(-x^2).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct GeneratorProbe {
    CVector value;                          // extrapolated -L u(x)
    Eigen::VectorXd stderr_re, stderr_im;
    std::vector<CVector> quotients;         // (P_t u(x) - u(x)) / t per entry of t_list
    std::vector<Eigen::VectorXd> quotient_stderr_re;
    bool inconclusive = false;
    long samples_used = 0;
    long rejected = 0;
};

/// Polynomial extrapolation to t = 0 of the difference quotients over t_list.
/// The same random draws are reused for every t.
GeneratorProbe generator_probe(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                               const FieldSection& u, const Vec& x, const std::vector<double>& t_list,
                               const EstimateOptions& opts);

}  // namespace heatpath
