#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shapebo/geometry.hpp"
#include "shapebo/rng.hpp"

namespace shapebo {

// The example families. Circle1/2/3 are the holes parameterized by radius
// and optionally center coordinates; OverCircle is the 39-parameter circle
// whose center/radius are sums of parameter blocks; Griewank is an analytic
// family with no associated shape (identity feature mapping).
enum class ProblemId {
    Circle1,
    Circle2,
    Circle3,
    OverCircle,
    ThreeCircles,
    Rectangle,
    Catenoid,
    Naca3,
    Naca22,
    Griewank,
};

enum class Mapping { Characteristic, SignedDistance, Contour };

struct GridSpec {
    int nx = 64;
    int ny = 64;
    double xmin = -1.0, xmax = 1.0;
    double ymin = -1.0, ymax = 1.0;

    [[nodiscard]] int size() const { return nx * ny; }
    /// Lattice point j (row-major, j = iy*nx + ix).
    [[nodiscard]] Vec2 point(int j) const {
        const int ix = j % nx;
        const int iy = j / nx;
        const double fx = nx > 1 ? static_cast<double>(ix) / (nx - 1) : 0.5;
        const double fy = ny > 1 ? static_cast<double>(iy) / (ny - 1) : 0.5;
        return {xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)};
    }
};

struct MappingSpec {
    Mapping mapping = Mapping::Contour;
    GridSpec grid;        // used by Characteristic / SignedDistance
    int num_points = 200; // used by Contour (representation length D = 2*num_points)
};

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

struct ProblemInfo {
    ProblemId id;
    std::string name;
    int dim = 0;
    std::vector<Bounds> bounds;
    bool has_shape = true;
    bool closed = true;
    int contour_parts = 1;
    GridSpec default_grid;
    int default_contour_points = 200;
};

const ProblemInfo& problem_info(ProblemId id);
ProblemId problem_from_name(const std::string& name); // throws std::invalid_argument
const std::vector<ProblemId>& all_problems();

struct DesignVector {
    ProblemId problem = ProblemId::Circle1;
    Eigen::VectorXd values;
};

/// Throws if the design has the wrong dimension or leaves its bounds.
void validate_design(const DesignVector& x);

/// Circle parameters (center, radius) for the circle-based families;
/// for OverCircle these are the derived sums (s, t, r).
struct CircleParams {
    double cx = 0.0, cy = 0.0, r = 1.0;
};
CircleParams circle_params(const DesignVector& x, int which = 0);

ContourShape generate_shape(const DesignVector& x);

Eigen::VectorXd map_characteristic(const ContourShape& shape, const GridSpec& grid);
Eigen::VectorXd map_signed_distance(const ContourShape& shape, const GridSpec& grid);

/// Generic arclength-equispaced resampling of every part, flattened as
/// (x0,y0,x1,y1,...). num_points is the total across parts (split equally).
Eigen::VectorXd map_contour(const ContourShape& shape, int num_points);

/// Family-canonical representation: uses exact parametric node placement for
/// the circle families and per-side stations for the rectangle so that
/// discretizations of a family are consistent with each other.
Eigen::VectorXd shape_representation(const DesignVector& x, const MappingSpec& spec);

int representation_dim(ProblemId id, const MappingSpec& spec);
MappingSpec default_mapping(ProblemId id, Mapping mapping);
Mapping mapping_from_name(const std::string& name);
std::string mapping_name(Mapping m);

struct ShapeDatabase {
    ProblemId problem = ProblemId::Circle1;
    MappingSpec mapping;
    std::uint64_t seed = 0;
    Eigen::MatrixXd designs; // N x d
    Eigen::MatrixXd phi;     // N x D
};

DesignVector sample_design(ProblemId id, Rng& rng);

/// Design sampler for database building. Default resolves to Uniform except
/// for the catenoid, whose plausible curves come from a squared-exponential
/// GP prior with envelope rejection.
enum class SamplerSpec { Default, Uniform, GpEnvelope };

/// N designs mapped row-by-row. Deterministic under `seed` regardless of
/// thread count; rows follow design index order.
ShapeDatabase build_database(ProblemId id, int n, const MappingSpec& spec, std::uint64_t seed,
                             SamplerSpec sampler = SamplerSpec::Default, int threads = 0);

/// Catenoid helpers shared by the sampler, the f5 objective and tests.
struct CatenoidConfig {
    double ya = 2.5, yb = 3.5;       // endpoint heights of A=(0,ya), B=(1,yb)
    double envelope_half_width = 0.5;
    double gp_sd = 0.25;             // prior sd of the perturbations
};
const CatenoidConfig& catenoid_config();
Eigen::VectorXd sample_catenoid_perturbations(Rng& rng);

} // namespace shapebo
