#pragma once

#include <string>
#include <utility>

#include "sio/metric_space.hpp"

namespace sio {

enum class KernelFamily {
    coordinate_riesz,  // (x_i - y_i) / |x - y|^{n+1}, Euclidean norm of the coordinate difference
    generic,           // (b(x,y) - b(y,x)) / 2 for a named base b, or b itself when not antisymmetrized
};

// Named base expressions b(x, y) for generic kernels.
enum class BaseExpression {
    zero,              // 0
    inverse_power,     // d(x,y)^{-s}
    upper_coordinate,  // d(x,y)^{-s} when x_i > y_i, else 0
};

struct KernelSpec {
    KernelFamily family = KernelFamily::coordinate_riesz;
    std::size_t coordinate = 1;  // 1-based coordinate index i
    double riesz_n = 1.0;        // dimension parameter n of the Riesz kernel
    BaseExpression base = BaseExpression::zero;
    bool antisymmetrize = true;
    double s = 1.0;  // kernel dimension
    double c = 1.0;  // size-bound constant, claimed or certified

    static KernelSpec riesz(std::size_t coordinate, double n);
    static KernelSpec generic(BaseExpression base, double s, std::size_t coordinate = 1,
                              bool antisymmetrize = true);
};

std::string to_string(BaseExpression base);
BaseExpression base_expression_from_string(const std::string& name);

// k(x, y). Antisymmetric kernels are evaluated on the ordered pair (min, max)
// and sign-flipped otherwise, so k(x,y) == -k(y,x) bit for bit.
// Throws DiagonalError when x == y.
double eval_kernel(const KernelSpec& kernel, const PointCloud& cloud, PointId x, PointId y);

struct AntisymmetryReport {
    bool ok = true;
    std::pair<PointId, PointId> worst_pair{0, 0};
    double worst_residual = 0.0;  // max |k(x,y) + k(y,x)|
    double max_abs_kernel = 0.0;
};

AntisymmetryReport check_antisymmetry(const KernelSpec& kernel, const PointCloud& cloud);

struct SizeBound {
    double c_certified = 0.0;  // max |k(x,y)| d(x,y)^s over distinct pairs
    std::pair<PointId, PointId> witness{0, 0};
};

SizeBound check_size_bound(const KernelSpec& kernel, const PointCloud& cloud, double s);

}  // namespace sio
