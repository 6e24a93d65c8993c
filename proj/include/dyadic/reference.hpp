#pragma once

#include "dyadic/haar.hpp"

/// Unoptimised enumerations of the dyadic quantities. Every average is a
/// fresh left-to-right scan over leaves and every sum is taken literally from
/// its definition, with no recurrences shared with the fast paths. Used to
/// certify search results; cost grows like N log N per quantity.
namespace dyadic::reference {

[[nodiscard]] double average(const StepFunction& f, NodeId node);
/// <f>_{I+} - <f>_{I-} for an internal node of a one-dimensional lattice.
[[nodiscard]] double increment(const StepFunction& f, NodeId node);
[[nodiscard]] double bmo_norm(const StepFunction& phi);
[[nodiscard]] double tl_norm(const StepFunction& f);
/// (1/4) sum_J |J| |Delta f_J| |Delta phi_J|.
[[nodiscard]] double duality_sum(const StepFunction& f, const StepFunction& phi);

}  // namespace dyadic::reference
