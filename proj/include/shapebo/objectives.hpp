#pragma once

#include "shapebo/shapes.hpp"

namespace shapebo {

enum class ObjectiveId { F2, F4, F5, FMG };

ObjectiveId objective_from_name(const std::string& name);
std::string objective_name(ObjectiveId id);

/// Analytic objectives from the benchmark suite. F4 carries the fixed target
/// shape; F5 the quadrature resolution.
struct Objective {
    ObjectiveId id = ObjectiveId::FMG;
    ProblemId problem = ProblemId::Griewank;
    Eigen::VectorXd f4_target_phi; // cached discretization of the centered target
    MappingSpec f4_mapping;
    int f5_panels = 2000;
};

/// Default objective for a family: F2 (over-parameterized circle),
/// F4 (rectangle/heart), F5 (catenoid), FMG (griewank40).
Objective make_objective(ProblemId problem);

double eval_objective(const Objective& obj, const DesignVector& x);

/// The versioned heart-target parameter vector for F4 (A at (2.5, 2.5)).
Eigen::VectorXd heart_target_params();

/// Thin-airfoil lift proxy (Glauert integral of the camber-line slope),
/// computed from the generated contour; responds to camber, not thickness.
double naca_lift_proxy(const DesignVector& x);

/// Axisymmetric-surface integral of an open curve (chord parameter on x);
/// composite trapezoid with finite-difference slopes on `panels` panels.
double surface_of_revolution(const Polyline& curve, int panels);

} // namespace shapebo
