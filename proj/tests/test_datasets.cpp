#include <cmath>

#include "cvnn/datasets.hpp"
#include "cvnn/errors.hpp"
#include "doctest.h"

using namespace cvnn;

TEST_CASE("xor") {
  const Dataset d = gen(Task::Xor, 100, 3);
  REQUIRE(d.size() == 4);
  CHECK(d.labels == std::vector<int>{0, 1, 1, 0});
  CHECK(d.inputs[0][0] == Complex(0, 0));
  CHECK(d.inputs[1][0] == Complex(1, 0));
  CHECK(d.inputs[2][0] == Complex(0, 1));
  CHECK(d.inputs[3][0] == Complex(1, 1));
  CHECK(d.targets[1][0] == Complex(1, 0));
}

TEST_CASE("rotation") {
  const Dataset same = gen(Task::Rotation, 64, 1, TaskParams{0.0});
  CHECK(same.targets == same.inputs);
  const Dataset d = gen(Task::Rotation, 256, 2);
  CHECK(d.size() == 256);
  CHECK(d.labels.empty());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(d.inputs[i][0]) <= 1.0);
    CHECK(std::abs(d.targets[i][0] - phasor(kPi / 3) * d.inputs[i][0]) <= 1e-15);
  }
}

TEST_CASE("circle classes have disjoint moduli") {
  const Dataset d = gen(Task::Circle, 100, 4);
  REQUIRE(d.size() == 100);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = std::abs(d.inputs[i][0]);
    if (d.labels[i] == 0) CHECK(r < 1.5);
    else CHECK(r > 1.5);
  }
}

TEST_CASE("arcs are unit-modulus and separable") {
  const Dataset d = gen(Task::Arcs, 20, 5);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(std::abs(d.inputs[i][0]) - 1.0) < 1e-15);
  }
}

TEST_CASE("generation is deterministic under seed") {
  for (Task t : {Task::Xor, Task::Rotation, Task::Circle, Task::Arcs}) {
    CHECK(gen(t, 50, 9) == gen(t, 50, 9));
  }
  CHECK_FALSE(gen(Task::Circle, 50, 9) == gen(Task::Circle, 50, 10));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(gen(Task::Rotation, 0, 1), InvalidArgument);
  TaskParams p;
  p.r1 = 2.0;
  p.r2 = 1.0;
  CHECK_THROWS_AS(gen(Task::Circle, 10, 1, p), InvalidArgument);
  CHECK_THROWS_AS(parse_task("spiral"), InvalidArgument);
}

TEST_CASE("json round trip") {
  for (Task t : {Task::Xor, Task::Rotation, Task::Circle, Task::Arcs}) {
    const Dataset d = gen(t, 30, 11);
    CHECK(dataset_from_json(dataset_to_json(d)) == d);
    CHECK(parse_task(to_string(t)) == t);
  }
  CHECK_THROWS_AS(dataset_from_json("{\"task\": \"xor\""), ParseError);
  CHECK_THROWS_AS(dataset_from_json("{\"task\": \"xor\", \"inputs_re\": []}"), ParseError);
}
