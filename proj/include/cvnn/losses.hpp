#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvnn/complex.hpp"

namespace cvnn {

enum class LossKind { Quadratic, Logarithmic, AverageCrossEntropy };

/// Quadratic:   1/2 sum |d_k - o_k|^2
/// Logarithmic: sum 1/2 [ln(r_d/r_o)^2 + wrap(phi_d - phi_o)^2]
/// ACE:         1/2 (CE(Re o, d) + CE(Im o, d)); Re o and Im o must
///              already be probability vectors and d a real distribution.
double loss(LossKind kind, std::span<const Complex> o, std::span<const Complex> d);

/// Per-output (dE/do_k, dE/dobar_k). The second entry is the exact
/// conjugate of the first.
std::vector<WirtingerPair> loss_partials(LossKind kind, std::span<const Complex> o,
                                         std::span<const Complex> d);

/// Natural-log cross entropy with probabilities clamped below at 1e-12.
double cross_entropy(std::span<const double> p, std::span<const double> d);

/// Distance from `o` to the nearest non-smooth point of the loss (the
/// origin and the phase-wrap seam for Logarithmic). Infinity otherwise.
double loss_kink_distance(LossKind kind, std::span<const Complex> o, std::span<const Complex> d);

std::string to_string(LossKind kind);
LossKind parse_loss(std::string_view text);

}  // namespace cvnn
