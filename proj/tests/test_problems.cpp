#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "pad/problems.hpp"

using namespace pad;

namespace {

ProblemInstance inst_of(ProblemId id, int M, std::initializer_list<double> x) {
  ProblemInstance inst;
  inst.id = id;
  inst.M = M;
  inst.x = Eigen::VectorXd(static_cast<Eigen::Index>(x.size()));
  int i = 0;
  for (double v : x) inst.x[i++] = v;
  return inst;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double e : v) y[i++] = e;
  return y;
}

}  // namespace

TEST_CASE("schemas are consistent for every problem and dimension") {
  for (ProblemId id : kAllProblems) {
    for (int M : {1, 2, 3, 5, 7}) {
      const ProblemSpec spec = make_spec(id, M);
      CHECK(spec.M == M);
      CHECK(spec.x_len() > 0);
      CHECK(spec.y_len() > 0);
      CHECK(static_cast<int>(spec.param_labels().size()) == spec.x_len());
      CHECK(static_cast<int>(spec.var_labels().size()) == spec.y_len());
      for (int i = 0; i < spec.x_len(); ++i) {
        const auto [lo, hi] = spec.param_range(i);
        CHECK(lo <= hi);
      }
      for (int i = 0; i < spec.y_len(); ++i) {
        const auto [lo, hi] = spec.var_range(i);
        CHECK(lo <= hi);
      }
    }
  }
}

TEST_CASE("the suite uses exactly the 19 physical types") {
  std::set<PhysicalType> used;
  for (ProblemId id : kAllProblems) {
    const ProblemSpec spec = make_spec(id, 5);
    for (auto t : spec.param_labels()) used.insert(t);
    for (auto t : spec.var_labels()) used.insert(t);
  }
  CHECK(static_cast<int>(used.size()) == kPhysicalTypeCount);
}

TEST_CASE("hand-checked objective values") {
  SUBCASE("P1 single unit channel gives one bit") {
    const ProblemSpec spec = make_spec(ProblemId::P1, 1);
    // g, N, B, P_total, R_min
    const auto inst = inst_of(ProblemId::P1, 1, {1.0, 1.0, 1.0, 2.0, 0.0});
    CHECK(objective(spec, inst, vec({1.0})) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("P8 cached value is the direct sum") {
    const ProblemSpec spec = make_spec(ProblemId::P8, 3);
    // lambda, s, alpha, C
    const auto inst = inst_of(ProblemId::P8, 3, {1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 1.0, 5.0});
    CHECK(objective(spec, inst, vec({1.0, 1.0, 0.0})) == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("P9 offloading cost adds transmission and share terms") {
    const ProblemSpec spec = make_spec(ProblemId::P9, 2);
    // C_local, C_trans, C_offload
    const auto inst = inst_of(ProblemId::P9, 2, {10.0, 10.0, 1.0, 1.0, 1.0, 4.0});
    const auto y = vec({1.0, 1.0, 1.0 / 3.0, 2.0 / 3.0});
    CHECK(objective(spec, inst, y) == doctest::Approx(11.0).epsilon(1e-12));
  }
  SUBCASE("P10 with a dead channel is an infinite delay") {
    const ProblemSpec spec = make_spec(ProblemId::P10, 1);
    // g, N, d, B, P_total
    const auto inst = inst_of(ProblemId::P10, 1, {1.0, 1e-6, 1e6, 1e6, 1.0});
    CHECK(std::isinf(objective(spec, inst, vec({0.0}))));
  }
}

TEST_CASE("objective is pure") {
  const ProblemSpec spec = make_spec(ProblemId::P3, 3);
  const ProblemInstance inst = sample_instance(spec, 5);
  const Eigen::VectorXd y = feasible_point(spec, inst);
  const double a = objective(spec, inst, y);
  const double b = objective(spec, inst, y);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("sum-rate objectives are monotone in channel gain") {
  for (ProblemId id : {ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P7}) {
    const ProblemSpec spec = make_spec(id, 3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      ProblemInstance inst = sample_instance(spec, seed);
      Eigen::VectorXd y = feasible_point(spec, inst);
      if (id == ProblemId::P7) y.tail(3).setConstant(views::P7::of(inst).P_total / 3);
      const double before = objective(spec, inst, y);
      inst.x[0] *= 1.5;  // g[0]
      CHECK(objective(spec, inst, y) >= before);
    }
  }
}

TEST_CASE("feasibility anchors") {
  SUBCASE("P1 over power budget") {
    const ProblemSpec spec = make_spec(ProblemId::P1, 1);
    const auto inst = inst_of(ProblemId::P1, 1, {1.0, 1.0, 1.0, 1.0, 0.0});
    const auto [ok, viol] = check_feasible(spec, inst, vec({2.0}));
    CHECK_FALSE(ok);
    REQUIRE(!viol.empty());
    CHECK(viol[0].constraint == "total_power");
  }
  SUBCASE("P2 over block budget") {
    const ProblemSpec spec = make_spec(ProblemId::P2, 2);
    const auto inst =
        inst_of(ProblemId::P2, 2, {0.5, 0.5, 5e-3, 5e-3, 1.0, 1.0, 180e3, 4.0, 0.0});
    const auto [ok, viol] = check_feasible(spec, inst, vec({2.0, 3.0}));
    CHECK_FALSE(ok);
    bool named = false;
    for (const auto& v : viol) named |= v.constraint == "total_blocks";
    CHECK(named);
  }
  SUBCASE("P8 exactly at capacity is feasible") {
    const ProblemSpec spec = make_spec(ProblemId::P8, 3);
    const auto inst = inst_of(ProblemId::P8, 3, {1.0, 1.0, 1.0, 2.0, 3.0, 4.0, 1.0, 5.0});
    CHECK(check_feasible(spec, inst, vec({1.0, 1.0, 0.0})).first);
  }
}

TEST_CASE("instance sampling is deterministic and in range") {
  const ProblemSpec spec = make_spec(ProblemId::P1, 3);
  const ProblemInstance a = sample_instance(spec, 7);
  const ProblemInstance b = sample_instance(spec, 7);
  CHECK((a.x.array() == b.x.array()).all());
  CHECK_FALSE((a.x.array() == sample_instance(spec, 8).x.array()).all());
  for (int i = 0; i < spec.x_len(); ++i) {
    const auto [lo, hi] = spec.param_range(i);
    CHECK(a.x[i] >= lo - 1e-12);
    CHECK(a.x[i] <= hi + 1e-12);
  }
}

TEST_CASE("P2 instances keep block headroom") {
  const ProblemSpec spec = make_spec(ProblemId::P2, 5);
  const auto inst = sample_instance(spec, 0);
  CHECK(views::P2::of(inst).B_total >= 5);
}

TEST_CASE("the constructive point is feasible everywhere") {
  for (ProblemId id : kAllProblems) {
    for (int M : {2, 3, 5}) {
      const ProblemSpec spec = make_spec(id, M);
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const ProblemInstance inst = sample_instance(spec, seed);
        CHECK(check_feasible(spec, inst, feasible_point(spec, inst)).first);
      }
    }
  }
}

TEST_CASE("uniform solutions respect kinds and bounds") {
  for (ProblemId id : kAllProblems) {
    const ProblemSpec spec = make_spec(id, 4);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd y = sample_uniform_solution(spec, rng);
      REQUIRE(y.size() == spec.y_len());
      for (int i = 0; i < spec.y_len(); ++i) {
        const auto [lo, hi] = spec.var_range(i);
        CHECK(y[i] >= lo);
        CHECK(y[i] <= hi);
        if (spec.var_kind(i) != VarKind::continuous)
          CHECK(y[i] == std::round(y[i]));
        if (spec.var_kind(i) == VarKind::binary) CHECK((y[i] == 0.0 || y[i] == 1.0));
      }
    }
  }
}

TEST_CASE("P6 keeps the load budget away from the pole") {
  const ProblemSpec spec = make_spec(ProblemId::P6, 3);
  const ProblemInstance inst = sample_instance(spec, 2);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(3, 0.34);  // sums past the cap
  CHECK_FALSE(check_feasible(spec, inst, u).first);
  u.setConstant(kP6LoadCap / 3.0);
  CHECK(check_feasible(spec, inst, u).first);
}

TEST_CASE("schema documents name every field") {
  for (ProblemId id : kAllProblems) {
    const std::string doc = schema_document(id, 3);
    const ProblemSpec spec = make_spec(id, 3);
    for (const auto& f : spec.params) CHECK(doc.find(f.name) != std::string::npos);
    for (const auto& f : spec.vars) CHECK(doc.find(f.name) != std::string::npos);
  }
}

TEST_CASE("dimension mismatches are schema errors") {
  const ProblemSpec spec = make_spec(ProblemId::P1, 3);
  const ProblemInstance inst = sample_instance(spec, 1);
  CHECK_THROWS_AS(objective(spec, inst, Eigen::VectorXd::Zero(2)), Error);
  CHECK_THROWS_AS(check_feasible(spec, inst, Eigen::VectorXd::Zero(7)), Error);
}
