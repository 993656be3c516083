#pragma once

#include <cstddef>

#include "cutlab/kernel.hpp"

namespace cutlab {

/// clamp(U, -f, f); a `truncated` catalog entry wrapping U.
KernelSpec truncate_kernel(const KernelSpec& U, double f);

/// 3 ||U||_p k^(1/(4p)).
double first_lemma_threshold(const KernelSpec& U, double p, std::size_t k);

/// 3 ||U||_p (ln k)^(1/(2p)). Below 3 ||U||_p for k = 2 since ln 2 < 1.
double second_lemma_threshold(const KernelSpec& U, double p, std::size_t k);

/// 2^p ||U||_p^p f / (f - ||U||_1)^p; requires f > ||U||_1.
double truncation_l1_error_bound(const KernelSpec& U, double p, double f);

/// ||U - U*||_1 = int (|U| - f)^+ in closed form.
double truncation_l1_error_exact(const KernelSpec& U, double f);

/// int_{|U| > f} |U|, the quantity the bound actually controls.
double truncation_tail_mass(const KernelSpec& U, double f);

/// Independent quadrature routes for the two integrals above.
double truncation_l1_error_quadrature(const KernelSpec& U, double f, double rel_tol = 1e-10);
double truncation_tail_mass_quadrature(const KernelSpec& U, double f, double rel_tol = 1e-10);

}  // namespace cutlab
