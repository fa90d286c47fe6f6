#pragma once

#include <cstdlib>
#include <string>

#include "ldtail/error.hpp"
#include "ldtail/field.hpp"

namespace ldtail {

/// Field expressions accepted in config files:
///   constant:v            the constant v
///   one_plus_x            1 + x0
///   x_times_one_minus_x   product over axes of x_a (1 - x_a)
inline ScalarField parse_field_expression(const GridPtr& grid, const std::string& expr) {
  if (expr.rfind("constant:", 0) == 0) {
    const std::string num = expr.substr(9);
    char* end = nullptr;
    const double v = std::strtod(num.c_str(), &end);
    if (num.empty() || *end != '\0' || !std::isfinite(v)) {
      throw InvalidArgument("expression '" + expr + "': constant needs a finite number");
    }
    return ScalarField(grid, v);
  }
  if (expr == "one_plus_x") {
    return ScalarField::from_function(grid, [](const Point& p) { return 1.0 + p[0]; });
  }
  if (expr == "x_times_one_minus_x") {
    const int dim = grid->dim();
    return ScalarField::from_function(grid, [dim](const Point& p) {
      double v = p[0] * (1.0 - p[0]);
      if (dim == 2) v *= p[1] * (1.0 - p[1]);
      return v;
    });
  }
  throw InvalidArgument("expression '" + expr +
                        "' is not one of constant:v, one_plus_x, x_times_one_minus_x");
}

}  // namespace ldtail
