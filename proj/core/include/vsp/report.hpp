#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vsp/partitioner.hpp"

namespace vsp {

// Human-readable names for state and action components of known environments.
std::vector<std::string> state_variable_names(const std::string& env_name, std::size_t state_dim);
std::vector<std::string> action_variable_names(const std::string& env_name, std::size_t action_dim);

// "F = -8.972·x + 30.034·v - 6.660": coefficients rounded to three decimals,
// terms that round to zero omitted.
std::string format_equation(const std::string& lhs, const std::vector<double>& weights, double bias,
                            const std::vector<std::string>& variables);

// Region table: codeword and one equation per action component.
std::string explain(const PartitionModel& model, const std::string& env_name);

struct DiagramSpec {
  std::array<std::size_t, 2> axes{0, 1};
  std::array<double, 2> x_range{0.0, 1.0};
  std::array<double, 2> y_range{0.0, 1.0};
  std::size_t resolution = 100;
  // Values for the state components not on the axes (full state vector;
  // the axis entries are ignored). Defaults to the codeword mean.
  std::optional<Vector> fixed;
};

struct GridSample {
  double x = 0.0;
  double y = 0.0;
  std::size_t region = 0;
  Vector action;
};

// A point on a cell boundary, refined by bisection between two grid samples.
// Where three or more cells meet inside one grid square, segments end at the
// mean of the refined points; that point has region_a == region_b.
struct BoundaryPoint {
  Vector state;  // full state vector
  std::size_t region_a = 0;
  std::size_t region_b = 0;
};

struct BoundarySegment {
  BoundaryPoint from;
  BoundaryPoint to;
};

struct Diagram {
  DiagramSpec spec;
  std::vector<GridSample> grid;  // resolution^2 samples, row-major in y then x
  std::vector<BoundarySegment> boundaries;
  std::vector<std::array<double, 2>> codewords;  // projected onto the axes
};

Diagram compute_diagram(const PartitionModel& model, const DiagramSpec& spec);
std::string diagram_svg(const Diagram& diagram, const std::vector<std::string>& axis_names);
// x,y,region,a0,...
std::string diagram_grid_csv(const Diagram& diagram);

}  // namespace vsp
