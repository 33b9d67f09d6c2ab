#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cvnn/complex.hpp"

namespace cvnn {

enum class Task { Xor, Rotation, Circle, Arcs };

/// Samples with complex targets. Classification tasks also carry integer
/// labels; their targets are the labels as c + 0i.
struct Dataset {
  Task task = Task::Xor;
  std::vector<ComplexVector> inputs;
  std::vector<ComplexVector> targets;
  std::vector<int> labels;

  std::size_t size() const noexcept { return inputs.size(); }
  bool operator==(const Dataset&) const = default;
};

struct TaskParams {
  double theta = kPi / 3.0;  // Rotation
  double r1 = 1.0;           // Circle inner radius
  double r2 = 2.0;           // Circle outer radius
  double radial_noise = 0.0; // Circle, half-width of uniform radial jitter
  double margin = 0.2;       // Arcs, angular gap to the class boundary
};

/// Xor: inputs {0, 1, i, 1+i}, labels {0, 1, 1, 0} (n ignored).
/// Rotation: x uniform in the unit disk, target e^{i theta} x.
/// Circle: alternating classes on radii r1 < r2 at uniform angles.
/// Arcs: unit-circle points on two opposite arcs of a randomly rotated
/// half-plane split; targets are the MVN sector bisectors (k = 2).
/// Throws InvalidArgument for n < 1 or r1 >= r2.
Dataset gen(Task task, std::size_t n, std::uint64_t seed, const TaskParams& params = {});

std::string to_string(Task task);
Task parse_task(std::string_view text);

/// Dataset file text (JSON with re/im arrays).
std::string dataset_to_json(const Dataset& data);
/// Throws ParseError.
Dataset dataset_from_json(std::string_view text);

}  // namespace cvnn
