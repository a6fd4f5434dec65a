// Copyright 2026 The klcontrol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "klc/cart_pole.hpp"
#include "klc/problem.hpp"

using Eigen::Vector4d;
using Eigen::VectorXd;

namespace {

const double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("accelerations at hand-checkable configurations") {
  const klc::CartPoleParams p;

  SUBCASE("upright at rest with no force") {
    const klc::CartPoleAccelerations a = klc::accelerations(p, 0.0, 0.0, 0.0);
    CHECK(a.linear == 0.0);
    CHECK(a.angular == 0.0);
  }

  SUBCASE("horizontal rod") {
    // sin = 1, cos = 0: gravity torques the rod but pushes the cart nowhere.
    const klc::CartPoleAccelerations a =
        klc::accelerations(p, kPi / 2.0, 0.0, 0.0);
    CHECK(a.linear == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(a.angular == doctest::Approx(9.8).epsilon(1e-12));
  }

  SUBCASE("upright with unit-free force") {
    // sin = 0: the force accelerates the cart alone, and the rod follows
    // with angular = linear * cos / L.
    const klc::CartPoleAccelerations a = klc::accelerations(p, 0.0, 0.0, 2.0);
    CHECK(a.linear == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.angular == doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("frozen values at the experiment's initial angle") {
    const klc::CartPoleAccelerations a = klc::accelerations(p, 0.5, 0.0, 0.0);
    CHECK(a.linear == doctest::Approx(0.40305657367960912).epsilon(1e-15));
    CHECK(a.angular == doctest::Approx(5.052085698837697).epsilon(1e-15));
  }
}

TEST_CASE("euler step propagates positions by current velocities") {
  const klc::CartPoleParams p;

  SUBCASE("upright equilibrium is an exact fixed point") {
    klc::CartPoleState s;
    const klc::CartPoleState next = klc::euler_step(p, s, 0.0);
    CHECK(next.position == 0.0);
    CHECK(next.velocity == 0.0);
    CHECK(next.angle == 0.0);
    CHECK(next.angular_rate == 0.0);
  }

  SUBCASE("frozen step from the experiment's initial state") {
    klc::CartPoleState s;
    s.position = 2.0;
    s.angle = 0.5;
    const klc::CartPoleState next = klc::euler_step(p, s, 0.0);
    CHECK(next.position == 2.0);  // velocity was zero
    CHECK(next.velocity ==
          doctest::Approx(0.020152828683980457).epsilon(1e-15));
    CHECK(next.angle == 0.5);  // angular rate was zero
    CHECK(next.angular_rate ==
          doctest::Approx(0.25260428494188486).epsilon(1e-15));
  }

  SUBCASE("dynamics are invariant to cart position") {
    klc::CartPoleState s;
    s.position = -1.3;
    s.velocity = 0.4;
    s.angle = 0.2;
    s.angular_rate = -0.1;
    const klc::CartPoleState a = klc::euler_step(p, s, 1.5);
    s.position += 10.0;
    const klc::CartPoleState b = klc::euler_step(p, s, 1.5);
    CHECK(b.position == doctest::Approx(a.position + 10.0).epsilon(1e-15));
    CHECK(b.velocity == a.velocity);
    CHECK(b.angle == a.angle);
    CHECK(b.angular_rate == a.angular_rate);
  }
}

TEST_CASE("stage cost is a weighted absolute-value norm") {
  const Vector4d w = klc::default_cart_pole_weights();
  CHECK(w[0] == 7.0);
  CHECK(w[1] == 2.5);
  CHECK(w[2] == 7.0);
  CHECK(w[3] == 2.5);

  klc::CartPoleState zero;
  CHECK(klc::stage_cost(w, zero) == 0.0);

  klc::CartPoleState start;
  start.position = 2.0;
  start.angle = 0.5;
  CHECK(klc::stage_cost(w, start) == doctest::Approx(17.5).epsilon(1e-15));

  klc::CartPoleState flipped;
  flipped.position = -start.position;
  flipped.velocity = -start.velocity;
  flipped.angle = -start.angle;
  flipped.angular_rate = -start.angular_rate;
  CHECK(klc::stage_cost(w, flipped) == klc::stage_cost(w, start));
}

TEST_CASE("uncontrolled upright pole is unstable") {
  const klc::CartPoleParams p;
  klc::CartPoleState s;
  s.angle = 0.01;
  double prev = s.angle;
  for (int k = 0; k < 20; ++k) {
    s = klc::euler_step(p, s, 0.0);
    CHECK(std::abs(s.angle) >= std::abs(prev));
    prev = s.angle;
  }
  CHECK(std::abs(s.angle) > 0.02);
}

TEST_CASE("dynamics model wraps the euler step and validates parameters") {
  const klc::CartPoleParams p;
  const klc::DynamicsModel dyn = klc::make_cart_pole_dynamics(p);
  CHECK(dyn.state_dim == 4);
  CHECK(dyn.input_dim == 1);

  VectorXd x(4);
  x << 2.0, -0.3, 0.5, 0.7;
  const VectorXd next = dyn.step(x, VectorXd::Constant(1, 3.0));
  klc::CartPoleState s;
  s.position = x[0];
  s.velocity = x[1];
  s.angle = x[2];
  s.angular_rate = x[3];
  const klc::CartPoleState expect = klc::euler_step(p, s, 3.0);
  CHECK(next[0] == expect.position);
  CHECK(next[1] == expect.velocity);
  CHECK(next[2] == expect.angle);
  CHECK(next[3] == expect.angular_rate);

  klc::CartPoleParams bad = p;
  bad.cart_mass = 0.0;
  CHECK_THROWS_AS(klc::make_cart_pole_dynamics(bad), std::invalid_argument);
  bad = p;
  bad.rod_length = -1.0;
  CHECK_THROWS_AS(klc::make_cart_pole_dynamics(bad), std::invalid_argument);
  bad = p;
  bad.time_step = 0.0;
  CHECK_THROWS_AS(klc::make_cart_pole_dynamics(bad), std::invalid_argument);
}

TEST_CASE("cost schedule applies the same weights at every stage") {
  const Vector4d w = klc::default_cart_pole_weights();
  const klc::CostSchedule costs = klc::make_cart_pole_cost(w, klc::Horizon(5));
  VectorXd x(4);
  x << 2.0, 0.0, 0.5, 0.0;
  for (int k = 0; k <= 5; ++k) {
    CHECK(costs.at(k, x) == doctest::Approx(17.5).epsilon(1e-15));
  }
  CHECK(costs.at(3, VectorXd::Zero(4)) == 0.0);
}
