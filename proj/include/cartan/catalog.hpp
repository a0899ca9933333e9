#pragma once

#include <string>
#include <vector>

#include "cartan/geometry.hpp"

namespace cartan {

/// Built-in geometries:
///   euclidean:n, hyperbolic:n, hyperbolic-klein:n, affine:n  (n in 1..6)
///   sphere:2, sl2xh, clifton-pohl
/// Throws UnknownModel for anything else.
Geometry catalog(const std::string& name);

std::vector<std::string> catalog_names();

/// Names of the built-in mutation models at a fixed dimension (n = 2).
std::vector<std::string> mutation_catalog_names();

/// o(1,n) realized on R^{1+n}: boosts K_i = E_0i + E_i0 then rotations of
/// the spatial block in the same order as euclidean_type_pair.
MatrixAlgebra lorentz_algebra(int n);

}  // namespace cartan
