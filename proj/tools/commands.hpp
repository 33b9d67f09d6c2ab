#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cvnn/datasets.hpp"
#include "cvnn/losses.hpp"
#include "cvnn/network.hpp"

namespace cvnn::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

/// Runs one command line (args[0] is the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Accuracy of `net` on a labelled dataset, as a fraction in [0, 1].
double accuracy(const Network& net, LossKind loss, const Dataset& data);

/// Training targets for `net`: one-hot for softmax heads and ACE, cast
/// labels, MVN sector targets, or the dataset targets as stored.
std::vector<ComplexVector> training_targets(const Network& net, LossKind loss, const Dataset& data);

}  // namespace cvnn::cli
