#include <cmath>
#include <stdexcept>
#include <string>

#include "cutlab/concentration.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/rng.hpp"
#include "cutlab/stats.hpp"
#include "doctest.h"

using namespace cutlab;

namespace {

StepKernel random_symmetric(std::size_t n, std::uint64_t seed, bool zero_diag = false) {
  Stream rng(seed);
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double x = (zero_diag && i == j) ? 0.0 : rng.uniform(-1.0, 1.0);
      v[i * n + j] = v[j * n + i] = x;
    }
  return StepKernel(n, std::move(v), zero_diag);
}

IndexSet random_subset(std::size_t n, Stream& rng) {
  IndexSet s;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.coin()) s.push_back(i);
  return s;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("delta statistics") {
  const KernelSpec C = KernelSpec::constant(2.5);
  const DeltaReport r = delta_U(C, draw_points(7, 3), 1.0, 0.5);
  CHECK(r.delta_value <= 1e-14);
  CHECK(r.in_L0);

  // Hand evaluation at X = (0.3, 0.7): sections (1-x)^-0.2 / 0.8 and the
  // single off-diagonal value ((0.7)(0.3))^-0.2, each against 1.5625.
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  SamplePoints X{2, 0, {0.3, 0.7}};
  const DeltaReport d = delta_U(U, X, 1.0, 0.5);
  CHECK(d.delta_value == doctest::Approx(0.2200738452677758053121766550969736540858).epsilon(1e-13));
  CHECK(d.per_j_average[0] == d.per_j_average[1]);

  const SamplePoints Y = draw_points(40, 11);
  const DeltaReport a = delta_U(U, Y, 0.1, 0.3);
  for (double nu : {0.1, 0.5, 1.0, 4.0, 100.0}) {
    const DeltaReport b = delta_U(U, Y, nu, 0.3);
    CHECK(b.delta_value == a.delta_value);
    if (a.in_L0) CHECK(b.in_L0);
  }
  CHECK(delta_U(U, Y, 1e9, 0.3).in_L0);
  CHECK_THROWS_AS(delta_U(U, SamplePoints{1, 0, {0.5}}, 1.0, 0.5), ParameterError);
}

TEST_CASE("L0 probability bound") {
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  double prev = l0_probability_bound(U, 3.0, 2.0, 0.5, 1 << 10);
  for (std::size_t k = 1 << 11; k <= (std::size_t{1} << 24); k <<= 1) {
    const double b = l0_probability_bound(U, 3.0, 2.0, 0.5, k);
    CHECK(b > prev);
    prev = b;
  }
  CHECK(prev > 0.99);
  CHECK(l0_probability_bound(U, 3.0, 1e6, 0.5, 32) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l0_probability_bound(U, 3.0, 2.0, 0.3, 32), ParameterError);
  CHECK(message_of([&] { l0_probability_bound(U, 3.0, 2.0, 0.3, 32); }).find("gamma * p > 1") !=
        std::string::npos);

  // Empirical membership frequency against the bound.
  const double bound = l0_probability_bound(U, 3.0, 2.0, 0.5, 32);
  std::size_t hits = 0;
  const std::size_t trials = 2000;
  for (std::size_t t = 0; t < trials; ++t)
    hits += delta_U(U, draw_points(32, derive_seed(5, "l0", t)), 2.0, 0.5).in_L0;
  CHECK(wilson_interval(hits, trials, 3.0).hi >= bound);
}

TEST_CASE("chebyshev bound") {
  CHECK(chebyshev_bound(1.0, 1e6, 3.0) < 1e-15);
  CHECK(chebyshev_bound(1.0, 1.0, 3.0) == 1.0);
  CHECK(chebyshev_bound(0.5, 4.0, 2.0) == doctest::Approx(0.125));
  // Z = |U(x,y)| for pow_corner(0.2): E Z^3 = ||U||_3^3.
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  const double m3 = std::pow(lp_norm(U, 3.0).value, 3.0);
  const double bound = chebyshev_bound(m3, 4.0, 3.0);
  Stream rng(17);
  std::size_t hits = 0;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i)
    hits += std::abs(eval(U, rng.uniform(), rng.uniform())) >= 4.0;
  CHECK(wilson_interval(hits, n, 3.0).lo <= bound);
}

TEST_CASE("coordinate replacement") {
  const SamplePoints X = draw_points(6, 9);
  CHECK(replace_coordinate(X, 2, X.coords[2]).coords == X.coords);
  const SamplePoints Y = replace_coordinate(X, 2, 0.123);
  CHECK(Y.coords[2] == 0.123);
  CHECK_THROWS_AS(replace_coordinate(X, 6, 0.5), std::out_of_range);
  CHECK_THROWS_AS(replace_coordinate(X, 0, 1.5), DomainError);

  const KernelSpec U = KernelSpec::signed_pow(0.2);
  const StepKernel A = sample_kernel(U, X), B = sample_kernel(U, Y);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i != 2 && j != 2) CHECK(A(i, j) == B(i, j));
  CHECK(A(0, 2) != B(0, 2));
}

TEST_CASE("replacement inequality") {
  const KernelSpec C = KernelSpec::constant(1.5);
  const SamplePoints X = draw_points(8, 1);
  const InequalityCheck cc = replacement_inequality_check(C, X, 3, 0.9, false);
  CHECK(cc.lhs == doctest::Approx(0.0).scale(1e-12));
  CHECK(cc.rhs == doctest::Approx(4.0 * 7 * 1.5));

  const KernelSpec U = KernelSpec::signed_pow(0.25, 1.3);
  const InequalityCheck same = replacement_inequality_check(U, X, 3, X.coords[3], true);
  CHECK(same.lhs == 0.0);
  CHECK(same.holds);

  int failures = 0;
  for (int t = 0; t < 300; ++t) {
    Stream rng(derive_seed(21, "replace", t));
    const SamplePoints Z = draw_points(10, rng.next_u64());
    const std::size_t a = rng.below(10);
    const double x0 = rng.uniform();
    for (bool one_sided : {false, true})
      for (const KernelSpec* K : {&U, &C})
        failures += !replacement_inequality_check(*K, Z, a, x0, one_sided).holds;
  }
  CHECK(failures == 0);
  CHECK_THROWS_AS(replacement_inequality_check(U, draw_points(31, 1), 0, 0.5, false), SizeError);
}

TEST_CASE("azuma constant and dispersion tail") {
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  CHECK(azuma_alpha(U, 16, 2.0, 0.5) == doctest::Approx(5.2734375).epsilon(1e-15));
  CHECK(azuma_alpha(U, 16, 0.0, 0.5) == doctest::Approx(6.0 * 1.5625 / 16));
  CHECK(azuma_alpha(KernelSpec::pow_corner(0.2, 2.0), 16, 2.0, 0.5) ==
        doctest::Approx(2.0 * 5.2734375));

  ConcentrationParams prm;
  prm.p = 3.0;
  prm.nu = 2.0;
  prm.gamma = 0.5;
  prm.lambda = 1.0;
  const TailBound t = dispersion_tail_bound(U, prm, 16);
  CHECK(t.threshold / (prm.lambda * 4.0) == doctest::Approx(azuma_alpha(U, 16, 2.0, 0.5)));
  prm.lambda = 50.0;
  const TailBound far = dispersion_tail_bound(U, prm, 16);
  const double l1 = 1.5625, l3 = lp_norm(U, 3.0).value;
  CHECK(far.prob == doctest::Approx(32.0 * std::min(1.0, std::pow(2.0 * l3 / (2.0 * l1), 3.0) /
                                                             std::pow(16.0, 1.5))));
  prm.gamma = 0.3;
  CHECK_THROWS_AS(dispersion_tail_bound(U, prm, 16), ParameterError);
}

TEST_CASE("plus sets") {
  const StepKernel W = random_symmetric(6, 4);
  CHECK(rplus_sets(W, {}, {}).first.empty());
  CHECK(rplus_sets(W, {}, {}).second.empty());
  const StepKernel P(3, {1, 2, 3, 2, 1, 1, 3, 1, 1});
  CHECK(rplus_sets(P, {1}, {0}).first == IndexSet{0, 1, 2});
  Stream rng(8);
  for (int t = 0; t < 50; ++t) {
    const IndexSet R1 = random_subset(6, rng), R2 = random_subset(6, rng);
    const auto [p1, p2] = rplus_sets(W, R1, R2);
    for (std::size_t j = 0; j < 6; ++j) {
      const IndexSet col{j};
      const bool in1 = std::find(p1.begin(), p1.end(), j) != p1.end();
      const bool in2 = std::find(p2.begin(), p2.end(), j) != p2.end();
      CHECK(in1 == (rectangle_sum(W, R1, col) > 0.0));
      CHECK(in2 == (rectangle_sum(W, col, R2) > 0.0));
    }
  }
  // A zero column sum joins neither side.
  const StepKernel Z(2, {1, -1, -1, 1});
  CHECK(rplus_sets(Z, {0, 1}, {0, 1}).first.empty());
}

TEST_CASE("q-subsample inequalities") {
  const StepKernel W0 = random_symmetric(10, 2, true);
  const SubsampleCheck e = bs12_check(W0, {}, {1, 2, 3}, 3);
  CHECK(e.lhs == 0.0);
  CHECK(e.rhs >= 0.0);
  CHECK(e.holds);
  CHECK(e.exact);

  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const StepKernel W = random_symmetric(10, derive_seed(3, "bs12", t), true);
    Stream rng(derive_seed(4, "bs12", t));
    const IndexSet R1 = random_subset(10, rng), R2 = random_subset(10, rng);
    failures += !bs12_check(W, R1, R2, 3).holds;
    failures += !bs12_check(W, R1, R2, 10).holds;
  }
  CHECK(failures == 0);

  const StepKernel big = random_symmetric(40, 6, true);
  const SubsampleCheck mc = bs12_check(big, {0, 1, 2, 3, 4}, {5, 6, 7, 8}, 10, 1);
  CHECK_FALSE(mc.exact);
  CHECK(mc.stderr_ > 0.0);

  const StepKernel pos(4, {0, 1, 2, 1, 1, 0, 3, 1, 2, 3, 0, 2, 1, 1, 2, 0}, true);
  const SubsampleCheck np = bplus_upper_check(pos, 2);
  CHECK(np.lhs == doctest::Approx(pos.grand_sum() / 16.0));
  CHECK(np.holds);

  failures = 0;
  for (int t = 0; t < 40; ++t) {
    const StepKernel W = random_symmetric(10, derive_seed(7, "bplus", t), true);
    failures += !bplus_upper_check(W, 2).holds;
    failures += !bplus_upper_check(W, 1).holds;
  }
  CHECK(failures == 0);
  CHECK_THROWS_AS(bplus_upper_check(random_symmetric(15, 1), 1), SizeError);
  CHECK_THROWS_AS(bplus_upper_check(random_symmetric(14, 1), 5), SizeError);
}

TEST_CASE("frobenius identity") {
  const FrobeniusCheck c = frobenius_check(KernelSpec::constant(2.0), 8, 100, 1);
  CHECK(c.empirical_mean_sq == doctest::Approx(4.0 * 8 * 7 / 64.0));
  CHECK(c.z_score == 0.0);
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  const FrobeniusCheck two = frobenius_check(U, 2, 100, 1);
  CHECK(two.target == doctest::Approx(std::pow(lp_norm(U, 2.0).value, 2.0) / 2.0));
  const FrobeniusCheck f = frobenius_check(U, 16, 4000, 2);
  CHECK(std::abs(f.z_score) <= 4.0);
  CHECK_THROWS_AS(frobenius_check(KernelSpec::pow_corner(0.6), 16, 100, 1), IntegrabilityError);
  CHECK_THROWS_AS(frobenius_check(U, 16, 10, 1), ParameterError);
}

TEST_CASE("theorem bounds: values") {
  const KernelSpec U = KernelSpec::pow_corner(0.2);
  ConcentrationParams prm;
  prm.p = 4.0;
  prm.phi = 0.01;
  // mpmath evaluations from the closed-form norms.
  BoundValue up = theorem_bound(BoundId::FirstUpper, U, prm, 256);
  CHECK(up.value == doctest::Approx(26.90346163759388430266014844731302967871).epsilon(1e-13));
  CHECK(up.terms[0].second == doctest::Approx(23.7170824512628449899917015832453890029).epsilon(1e-13));
  CHECK(up.terms[0].second == doctest::Approx(30.0 * lp_norm(U, 4.0).value * std::pow(256.0, -3.0 / 16)));
  CHECK(up.probability == doctest::Approx(-1.403209632768866231547730940106695884664).epsilon(1e-13));

  prm.gamma = 0.4;
  const BoundValue lo = theorem_bound(BoundId::FirstLower, U, prm, 256);
  CHECK(lo.value == doctest::Approx(-28.93560509992876774816974033118743634405).epsilon(1e-13));
  CHECK(lo.probability == doctest::Approx(0.8923095292190279681126287237395692884896).epsilon(1e-13));

  prm.phi = 0.1;
  const BoundValue two = theorem_bound(BoundId::SecondLemma, U, prm, 1024);
  CHECK(two.probability == doctest::Approx(0.8125).epsilon(1e-15));
  CHECK(two.probability_alt < two.probability);
  CHECK(two.terms[0].first == "C");
  CHECK(two.terms[0].second == doctest::Approx(53.43507739849256412920484810543841106256).epsilon(1e-9));

  const BoundValue qs = theorem_bound(BoundId::QSampleUpper, U, prm, 1024);
  CHECK(qs.terms[0].second == 3.0);
  CHECK(qs.value == doctest::Approx(1048.183481475463714631335558659055642154).epsilon(1e-12));

  const BoundValue bnd = theorem_bound(BoundId::SecondLemmaBounded, KernelSpec::constant(2.0), prm, 256);
  CHECK(bnd.value == doctest::Approx(20.0 * 2.0 / std::sqrt(8.0)));
  CHECK(theorem_bound(BoundId::SystematicLower, U, prm, 16).value == doctest::Approx(-1.5625 / 16));
}

TEST_CASE("theorem bounds: structure and constraints") {
  ConcentrationParams prm;
  prm.p = 4.0;
  prm.gamma = 0.4;
  KernelNorms n{4.0, 1.0, 2.0, 1.5, 0.5, 0.5, 0.0};
  const double base = theorem_bound(BoundId::FirstLower, n, prm, 512).terms[1].second;
  KernelNorms m = n;
  m.l1 = 2.0;
  m.lp = 4.0;
  CHECK(theorem_bound(BoundId::FirstLower, m, prm, 512).terms[1].second == doctest::Approx(2.0 * base));

  prm.p = 5.0;
  prm.phi = 0.05;
  n.p = 5.0;
  double prev = theorem_bound(BoundId::FirstUpper, n, prm, 16).value;
  for (std::size_t k = 32; k <= (std::size_t{1} << 30); k <<= 1) {
    const double v = theorem_bound(BoundId::FirstUpper, n, prm, k).value;
    CHECK(v < prev);
    prev = v;
  }

  prm.p = 4.0;
  n.p = 4.0;
  prm.phi = 0.3;
  CHECK(message_of([&] { theorem_bound(BoundId::SecondLemma, n, prm, 64); }).find("phi < 1/2 - 1/p") !=
        std::string::npos);
  prm.gamma = 0.2;
  CHECK(message_of([&] { theorem_bound(BoundId::FirstLower, n, prm, 64); }).find("gamma > 1/p") !=
        std::string::npos);
  prm.gamma = 0.6;
  CHECK(message_of([&] { theorem_bound(BoundId::FirstLower, n, prm, 64); }).find("gamma < 1/2") !=
        std::string::npos);
  prm.p = 2.0;
  n.p = 2.0;
  CHECK(message_of([&] { theorem_bound(BoundId::FirstUpper, n, prm, 64); }).find("p > 2") !=
        std::string::npos);
  CHECK(bound_from_string("second_lemma") == BoundId::SecondLemma);
  CHECK_THROWS_AS(bound_from_string("nope"), ParameterError);
}
