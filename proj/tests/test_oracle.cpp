#include <doctest.h>

#include <cmath>

#include "pad/oracle.hpp"
#include "support.hpp"

using namespace pad;

TEST_CASE("discrete solvers match naive enumeration on small instances") {
  for (ProblemId id : {ProblemId::P2, ProblemId::P3, ProblemId::P4, ProblemId::P7, ProblemId::P8,
                       ProblemId::P9}) {
    for (int i = 0; i < 6; ++i) {
      const int M = 2 + i % 3;
      const ProblemSpec spec = padtest::clamp_block_budget(make_spec(id, M), 8);
      const ProblemInstance inst = sample_instance(spec, 100 + i);
      const OracleResult res = solve(spec, inst);
      const double naive = padtest::enumerate_best(spec, inst);
      REQUIRE(!std::isnan(naive));
      CHECK(res.objective == naive);
      CHECK(check_feasible(spec, inst, res.y).first);
    }
  }
}

TEST_CASE("oracle solutions always pass the feasibility check") {
  for (ProblemId id : kAllProblems) {
    const ProblemSpec spec = padtest::clamp_block_budget(make_spec(id, 3), 9);
    for (std::uint64_t seed = 40; seed < 44; ++seed) {
      const ProblemInstance inst = sample_instance(spec, seed);
      const OracleResult res = solve(spec, inst);
      CHECK(check_feasible(spec, inst, res.y).first);
      CHECK(res.objective == objective(spec, inst, res.y));
    }
  }
}

TEST_CASE("continuous solvers sit at projected-gradient fixed points") {
  for (ProblemId id : {ProblemId::P1, ProblemId::P5, ProblemId::P6}) {
    const ProblemSpec spec = make_spec(id, 3);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const ProblemInstance inst = sample_instance(spec, seed);
      const OracleResult res = solve(spec, inst);
      CHECK(stationarity_residual(spec, inst, res.y) <= 1e-6);
      // random feasible perturbations never help
      Rng rng(derive_seed(seed, "perturb"));
      for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd dir(res.y.size());
        for (Eigen::Index j = 0; j < dir.size(); ++j) dir[j] = rng.normal();
        const Eigen::VectorXd cand =
            project_feasible(spec, inst, res.y + 1e-3 * dir.normalized());
        const double f = objective(spec, inst, cand);
        if (spec.sense == Sense::maximize)
          CHECK(f <= res.objective + 1e-6);
        else
          CHECK(f >= res.objective - 1e-6);
      }
    }
  }
}

TEST_CASE("projection lands on the feasible set") {
  for (ProblemId id : {ProblemId::P1, ProblemId::P5, ProblemId::P6}) {
    const ProblemSpec spec = make_spec(id, 3);
    const ProblemInstance inst = sample_instance(spec, 17);
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd y(spec.y_len());
      for (Eigen::Index j = 0; j < y.size(); ++j) y[j] = rng.uniform(-1.0, 2.0);
      CHECK(check_feasible(spec, inst, project_feasible(spec, inst, y)).first);
    }
  }
}

TEST_CASE("P7 inner powers are stationary with blocks fixed") {
  const ProblemSpec spec = padtest::clamp_block_budget(make_spec(ProblemId::P7, 3), 9);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ProblemInstance inst = sample_instance(spec, seed);
    const OracleResult res = solve(spec, inst);
    CHECK(stationarity_residual(spec, inst, res.y) <= 1e-6);
  }
}

TEST_CASE("P9 hand anchors") {
  const ProblemSpec spec = make_spec(ProblemId::P9, 2);
  ProblemInstance inst;
  inst.id = ProblemId::P9;
  inst.M = 2;
  inst.x = Eigen::VectorXd(6);
  inst.x << 10.0, 10.0, 1.0, 1.0, 1.0, 4.0;

  SUBCASE("closed-form shares") {
    Eigen::VectorXd D(2);
    D << 1.0, 1.0;
    const Eigen::VectorXd A = p9_inner_allocation(inst, D);
    CHECK(A[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(A[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(A.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("single offloaded task takes the budget") {
    Eigen::VectorXd D(2);
    D << 0.0, 1.0;
    const Eigen::VectorXd A = p9_inner_allocation(inst, D);
    CHECK(A[0] == 0.0);
    CHECK(A[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("symmetric costs split evenly") {
    inst.x[4] = 1.0;
    inst.x[5] = 1.0;
    Eigen::VectorXd D(2);
    D << 1.0, 1.0;
    const Eigen::VectorXd A = p9_inner_allocation(inst, D);
    CHECK(A[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(A[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("all-local allocation is rejected") {
    CHECK_THROWS_AS(p9_inner_allocation(inst, Eigen::VectorXd::Zero(2)), Error);
  }
  SUBCASE("full solve picks both offloaded") {
    const OracleResult res = solve(spec, inst);
    CHECK(res.objective == doctest::Approx(11.0).epsilon(1e-12));
    CHECK(res.y[0] == 1.0);
    CHECK(res.y[1] == 1.0);
  }
}

TEST_CASE("P9 closed form beats a fine grid") {
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemSpec spec = make_spec(ProblemId::P9, 3);
    const ProblemInstance inst = sample_instance(spec, 300 + trial);
    Eigen::VectorXd D(3);
    D << 1.0, 1.0, 1.0;
    const Eigen::VectorXd A = p9_inner_allocation(inst, D);
    Eigen::VectorXd y(6);
    y << D, A;
    const double closed = objective(spec, inst, y);
    // 100x100 grid over the 3-simplex interior
    double grid_best = std::numeric_limits<double>::infinity();
    for (int a = 1; a < 100; ++a)
      for (int b = 1; b + a < 100; ++b) {
        y[3] = a / 100.0;
        y[4] = b / 100.0;
        y[5] = 1.0 - y[3] - y[4];
        grid_best = std::min(grid_best, objective(spec, inst, y));
      }
    CHECK(closed <= grid_best + 1e-12);
    CHECK(grid_best - closed <= 1e-4 * std::abs(grid_best) + 1e-4);
  }
}

TEST_CASE("P10 anchors and budget binding") {
  SUBCASE("single channel unit anchor") {
    const ProblemSpec spec = make_spec(ProblemId::P10, 1);
    ProblemInstance inst;
    inst.id = ProblemId::P10;
    inst.M = 1;
    inst.x = Eigen::VectorXd(5);
    inst.x << 1.0, 1e-6, 1e6, 1e6, 1.0;  // g, N, d, B, P_total
    const OracleResult res = solve(spec, inst);
    CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.y.sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("powers-for-delay identities") {
    const ProblemSpec spec = make_spec(ProblemId::P10, 2);
    const ProblemInstance inst = sample_instance(spec, 9);
    const auto v = views::P10::of(inst);
    // d = B*tau gives one bit per Hz-second, so p = B*N/g
    const double tau0 = v.d[0] / v.B;
    const Eigen::VectorXd p = p10_powers_for_delay(inst, tau0);
    CHECK(p[0] == doctest::Approx(v.B * v.N[0] / v.g[0]).epsilon(1e-9));
    // large tau needs vanishing power
    CHECK(p10_powers_for_delay(inst, 1e9).maxCoeff() < 1e-6);
    CHECK_THROWS_AS(p10_powers_for_delay(inst, 0.0), Error);
  }
  SUBCASE("symmetric channels get equal powers") {
    const ProblemSpec spec = make_spec(ProblemId::P10, 2);
    ProblemInstance inst;
    inst.id = ProblemId::P10;
    inst.M = 2;
    inst.x = Eigen::VectorXd(8);
    inst.x << 0.5, 0.5, 5e-3, 5e-3, 1e6, 1e6, 1e6, 1.5;  // g, N, d, B, P_total
    const OracleResult res = solve(spec, inst);
    CHECK(res.y[0] == doctest::Approx(res.y[1]).epsilon(1e-6));
    CHECK(res.y.sum() == doctest::Approx(1.5).epsilon(1e-6));
  }
  SUBCASE("random instances meet the budget and bind the max delay") {
    const ProblemSpec spec = make_spec(ProblemId::P10, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ProblemInstance inst = sample_instance(spec, seed);
      const auto v = views::P10::of(inst);
      const OracleResult res = solve(spec, inst);
      CHECK(std::abs(res.y.sum() - v.P_total) <= 1e-6 * v.P_total);
      CHECK(res.report.certificate == CertificateKind::bisection_converged);
      // every channel's delay is at most tau* (max channels bind)
      const double tau = res.objective;
      for (int m = 0; m < 3; ++m) {
        const double rate = v.rate(m, res.y[m]);
        CHECK(v.d[m] / rate <= tau + 1e-9);
      }
    }
  }
}

TEST_CASE("certificates match the problem class") {
  CHECK(solve(make_spec(ProblemId::P1, 2), sample_instance(make_spec(ProblemId::P1, 2), 1))
            .report.certificate == CertificateKind::first_order);
  const ProblemSpec p2 = padtest::clamp_block_budget(make_spec(ProblemId::P2, 2), 6);
  CHECK(solve(p2, sample_instance(p2, 1)).report.certificate == CertificateKind::exhaustive);
}

TEST_CASE("enumeration scale guard trips") {
  ProblemSpec spec = make_spec(ProblemId::P2, 7);
  for (auto& f : spec.params)
    if (f.type == PhysicalType::total_blocks) {
      f.lo = 4000;
      f.hi = 4000;
    }
  const ProblemInstance inst = sample_instance(spec, 3);
  CHECK_THROWS_AS(solve(spec, inst), Error);
}
