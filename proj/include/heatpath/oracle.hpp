#pragma once
/**
 * @file oracle.hpp
 * @brief Reference solutions of the heat equation used to judge estimates.
 *
 * Sign convention: L = -(sum of second derivatives) + V in the flat
 * trivialization, so interval Dirichlet eigenvalues on (0, pi) are k^2.
 */

#include "heatpath/bundle.hpp"
#include "heatpath/geometry.hpp"
#include "heatpath/semigroup.hpp"

#include <optional>
#include <vector>

namespace heatpath {

enum class ProblemTag { interval_dirichlet, interval_neumann, circle, circle_holonomy, torus, sphere };

const char* to_string(ProblemTag tag);

struct Eigenpair {
    double lambda = 0.0;
    int mode[2] = {0, 0};  // k for 1-D problems, (k1,k2) on the torus, l on the sphere
};

/// One term c * exp(-lambda t) * phi(x) of an expansion.
struct ModalTerm {
    double lambda = 0.0;
    Complex coefficient = 1.0;
    std::function<Complex(const Vec&)> basis;
};

struct SpectralModel {
    ProblemTag tag = ProblemTag::interval_dirichlet;
    double lower = 0.0;    // interval
    double upper = 1.0;
    double radius = 1.0;   // circle, sphere
    double period0 = 1.0;  // torus
    double period1 = 1.0;
    double holonomy = 0.0;

    double length() const { return upper - lower; }
    /// Eigenvalue of a mode, see Eigenpair::mode.
    double eigenvalue(int m0, int m1 = 0) const;
    /// The J smallest eigenpairs, nondecreasing.
    std::vector<Eigenpair> eigenpairs(int count) const;
    /// Exact expansion of a registry section, or an unsupported error.
    std::vector<ModalTerm> decompose(const FieldSection& u) const;
};

/// Spectral model matching (geometry, bundle, boundary) when one exists:
/// zero potential, and a zero or circle-holonomy connection, scalar B.
std::optional<SpectralModel> spectral_model_for(const GeometryModel& g, const BundleSpec& b,
                                                const BoundaryOperator& B);

struct EvolvedSection {
    FieldSection section;
    double tail_bound = 0.0;
    std::size_t terms = 0;
};

EvolvedSection spectral_evolve(const SpectralModel& model, const FieldSection& u0, double t);

/// Heat kernel on (a,b) from the eigenfunction expansion, truncated once the
/// remaining tail is below tail_tol.
double spectral_kernel(const SpectralModel& model, double x, double y, double t, double tail_tol = 1e-12);

enum class ImageProblem { half_line, interval };
enum class ImageBc { dirichlet, neumann };

/// Method-of-images heat kernel on [0,inf) or (a,b).
double image_kernel(ImageProblem problem, ImageBc bc, double x, double y, double t, double a = 0.0,
                    double b = 1.0);
/// int_a^b K(x,y,t) u0(y) dy for the interval image kernel (component 0 of u0).
Complex apply_image_kernel(ImageBc bc, const FieldSection& u0, double x, double t, double a, double b,
                           int panels = 4000);

struct FdSolution {
    std::vector<double> nodes;
    std::vector<double> values;
    /// max |u_h - u_{h/2}| / 3 between the two Richardson levels
    double self_consistency = 0.0;

    double eval(double x) const;
    FieldSection as_section() const;
};

inline constexpr double kFdSelfConsistency = 1e-7;

/// Crank-Nicolson for u_t = u_xx - V u on (a,b) with Dirichlet or Neumann
/// data, on `grid` and `2*grid` intervals with dt <= h^2, Richardson combined.
/// The grid is doubled once if self_consistency exceeds kFdSelfConsistency;
/// failing that too is an error.
FdSolution fd_reference_evolve(double a, double b, const Potential& v, ImageBc bc, const FieldSection& u0,
                               double t, int grid = 2000);

}  // namespace heatpath
