#include <algorithm>
#include <cmath>
#include <numeric>

#include "cutlab/cutdist.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/quadrature.hpp"
#include "cutlab/rng.hpp"
#include "doctest.h"

using namespace cutlab;

namespace {

StepKernel random_symmetric(std::size_t n, Stream& rng) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) v[i * n + j] = v[j * n + i] = rng.uniform(-1.0, 1.0);
  return StepKernel(n, std::move(v));
}

}  // namespace

TEST_CASE("blow-up preserves the function") {
  Stream rng(1);
  const StepKernel W = random_symmetric(3, rng);
  const StepKernel B = blowup(W, 4);
  CHECK(B.n() == 12);
  CHECK(blowup(W, 1).values().size() == 9);
  CHECK(B.l1_norm() == doctest::Approx(W.l1_norm()).epsilon(1e-14));
  CHECK(cut_norm_exact(B).value == doctest::Approx(cut_norm_exact(W).value).epsilon(1e-13));
  CHECK_THROWS_AS(blowup(W, 2000), SizeError);
  CHECK_THROWS_AS(blowup(W, 0), ParameterError);
}

TEST_CASE("exact permutation search recovers a relabeling") {
  Stream rng(2);
  for (std::size_t n : {4, 6, 8}) {
    const StepKernel W = random_symmetric(n, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const auto est = cut_distance_upper(W, W.permuted(perm));
    CHECK(est.method == DistMethod::ExactPerm);
    CHECK(est.upper == 0.0);
    CHECK(est.lower == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cut_distance_upper(W, W).upper == 0.0);
  }
}

TEST_CASE("lower bound and symmetry") {
  const StepKernel cb1(2, {1.0, -1.0, -1.0, 1.0});
  const StepKernel cb2 = cb1.scaled(2.0);
  CHECK(cut_distance_lower(cb1, cb2) == doctest::Approx(0.25));
  CHECK(cut_distance_lower(cb1, StepKernel::zeros(2)) == doctest::Approx(0.25));
  CHECK(cut_distance_lower(cb1, cb1) == 0.0);

  Stream rng(3);
  for (int t = 0; t < 5; ++t) {
    const StepKernel A = random_symmetric(6, rng), B = random_symmetric(3, rng);
    const auto ab = cut_distance_upper(A, B), ba = cut_distance_upper(B, A);
    CHECK(ab.upper == doctest::Approx(ba.upper).epsilon(1e-12));
    CHECK(ab.lower <= ab.upper);
    CHECK(ab.blowup_size == 6);
  }
}

TEST_CASE("two samples at k = 8: annealing never beats exhaustive search") {
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  const StepKernel A = draw_sample(U, 8, 10).kernel, B = draw_sample(U, 8, 11).kernel;
  const auto exact = cut_distance_upper(A, B);
  CHECK(exact.method == DistMethod::ExactPerm);
  CHECK(std::isfinite(exact.upper));
  CHECK(exact.lower <= exact.upper);
  // Verify the witness.
  StepKernel D = A - B.permuted(exact.permutation);
  CHECK(cut_norm_exact(D).value == doctest::Approx(exact.upper).epsilon(1e-12));

  // Blow both to 9 blocks? lcm would be 8; use 16 to force annealing and compare
  // against the 8-block optimum lifted to 16.
  AnnealConfig cfg;
  cfg.restarts = 2;
  cfg.sweeps = 4;
  cfg.proposals_per_block = 20;
  const auto annealed = cut_distance_upper(blowup(A, 2), blowup(B, 2), cfg, 5);
  CHECK(annealed.method == DistMethod::Annealed);
  CHECK(annealed.upper >= exact.upper - 1e-12);
}

TEST_CASE("large sizes use the certified spectral bound") {
  Stream rng(4);
  const StepKernel A = random_symmetric(40, rng), B = random_symmetric(40, rng);
  AnnealConfig cfg;
  cfg.objective = AnnealObjective::Frobenius;
  cfg.restarts = 1;
  cfg.sweeps = 5;
  cfg.proposals_per_block = 20;
  const auto est = cut_distance_upper(A, B, cfg, 1);
  CHECK_FALSE(est.estimate_exact);
  CHECK(est.estimate <= est.upper);
  CHECK(cut_norm_certified_upper(A) >= cut_norm_heuristic(A, 8, 1).value);
  const StepKernel small = random_symmetric(10, rng);
  CHECK(cut_norm_certified_upper(small) >= cut_norm_exact(small).value);
}

TEST_CASE("discretization") {
  const auto cb = discretize_kernel(KernelSpec::checkerboard(2, 3.0), 4);
  CHECK(cb.l1_error_bound == 0.0);
  CHECK(cb.kernel(0, 2) == -3.0);
  CHECK(cb.kernel(1, 1) == 3.0);
  const auto same = discretize_kernel(KernelSpec::step(2, {1.0, 2.0, 2.0, 0.5}), 2);
  CHECK(same.l1_error_bound == 0.0);
  const auto coarse = discretize_kernel(KernelSpec::checkerboard(2), 3);
  CHECK(coarse.kernel(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(coarse.kernel(1, 1)) < 1e-15);
  // 5 of the 9 coarse blocks straddle a sign change and average to zero.
  CHECK(coarse.l1_error_bound == doctest::Approx(5.0 / 9.0));

  // mpmath block-by-block integration of the same bound
  const auto pc = discretize_kernel(KernelSpec::pow_corner(0.2), 16);
  CHECK(pc.l1_error_bound == doctest::Approx(0.0844198666158121131104).epsilon(1e-12));
  const auto sp = discretize_kernel(KernelSpec::signed_pow(0.2, 1.5), 5);
  CHECK(sp.l1_error_bound == doctest::Approx(1.12773224257934408478).epsilon(1e-12));

  // Block averages by quadrature, and the true L1 error stays below the bound.
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  const int m = 4;
  const auto d = discretize_kernel(U, m);
  for (int i = 0; i < m; ++i) {
    auto g = [](double x) { return std::pow(1.0 - x, -0.2); };
    const double ai = quad::integrate(g, double(i) / m, double(i + 1) / m).value * m;
    CHECK(d.kernel(i, i) == doctest::Approx(ai * ai).epsilon(1e-6));
  }
  CHECK(d.kernel.l1_norm() == doctest::Approx(1.5625).epsilon(1e-13));
  CHECK_THROWS_AS(discretize_kernel(KernelSpec::truncated(U, 2.0), 4), UnsupportedError);
}
