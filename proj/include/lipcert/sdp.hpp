#pragma once

#include "lipcert/conic_program.hpp"
#include "lipcert/multipliers.hpp"
#include "lipcert/reduction.hpp"

namespace lipcert {

/// Rows are the coordinate vectors of the multiplier frame in [1; w; p]
/// space, size (2 n_r + 1) x (1 + m + n_r). kReluGraph gives [1; q; p],
/// kSlackGraph gives [1; p - q; p].
Matrix frame_matrix(const ReducedModel& rm, PiFrame frame);

/// B with B' [1; w; p] = G_r(w) - z0 when p = relu(W_in_h w + b_in_h);
/// size (1 + m + n_r) x l.
Matrix output_matrix(const ReducedModel& rm, const Vector& z0);

/// Quadratic form of eps^2 - |w - w0|^2 on [1; w; p].
Matrix ball_matrix(const TargetSpec& target, int n_r);

/// min l_sq over l_sq, tau >= 0 and a multiplier of class `cls`, subject to
///   -(B B' - l_sq e1 e1' + tau T + A' Pi A) >= 0.
ConicProgram build_primal(const ReducedModel& rm, const TargetSpec& target,
                          const Vector& z0, MultiplierClass cls);

/// max <B B', H> over H >= 0 with H_11 = 1, <T, H> >= 0, the ReLU
/// complementarity equalities and entrywise nonnegativity of M H M'.
ConicProgram build_dual(const ReducedModel& rm, const TargetSpec& target,
                        const Vector& z0);

}  // namespace lipcert
