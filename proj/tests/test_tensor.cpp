#include <doctest.h>

#include "helpers.hpp"
#include "siglift/errors.hpp"
#include "siglift/tensor.hpp"

using namespace siglift;
using testing::max_entry;
using testing::max_rel_diff;
using testing::random_tensor;

TEST_CASE("tensor_product entries and shapes") {
  std::vector<double> a{1, 0}, b{0, 1};
  CHECK(tensor_product(a, b, 2) == std::vector<double>{0, 1, 0, 0});
  std::vector<double> z(2, 0.0);
  CHECK(tensor_product(a, z, 2) == std::vector<double>(4, 0.0));
  CHECK(tensor_product(std::vector<double>{2}, std::vector<double>{3}, 1) == std::vector<double>{6});
  CHECK_THROWS_AS(tensor_product(std::vector<double>{1, 2, 3}, b, 2), ValidationError);
}

TEST_CASE("tensor_product is submultiplicative and distributive") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto a = random_tensor(3, 2, s), b = random_tensor(3, 1, s + 100), c = random_tensor(3, 1, s + 200);
    auto ab = tensor_product(a.level(2), b.level(1), 3);
    CHECK(max_abs(ab) <= max_abs(a.level(2)) * max_abs(b.level(1)) + 1e-15);
    std::vector<double> bc(3);
    for (int i = 0; i < 3; ++i) bc[i] = b.level(1)[i] + c.level(1)[i];
    auto lhs = tensor_product(a.level(2), bc, 3);
    auto ac = tensor_product(a.level(2), c.level(1), 3);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(ab[i] + ac[i]).epsilon(1e-14));
  }
}

TEST_CASE("chen_combine identity, hand example and associativity") {
  GradedTensor x(1, 2), y(1, 2);
  x.level(1)[0] = 2.0;
  y.level(1)[0] = 5.0;
  auto xy = chen_combine(x, y);
  CHECK(xy.level(1)[0] == 7.0);
  CHECK(xy.level(2)[0] == 10.0);
  auto a = random_tensor(2, 4, 1);
  CHECK(chen_combine(a, GradedTensor::zero(2, 4)) == a);
  CHECK(chen_combine(GradedTensor::zero(2, 4), a) == a);
  for (std::size_t d = 1; d <= 3; ++d)
    for (std::size_t depth = 1; depth <= 5; ++depth) {
      auto p = random_tensor(d, depth, 10 * d + depth), q = random_tensor(d, depth, 99 + d), r = random_tensor(d, depth, 7 + depth);
      CHECK(max_rel_diff(chen_combine(chen_combine(p, q), r), chen_combine(p, chen_combine(q, r))) <= 1e-10);
    }
  CHECK_THROWS_AS(chen_combine(GradedTensor(2, 3), GradedTensor(2, 2)), ValidationError);
}

TEST_CASE("chen_level agrees with the full product") {
  auto a = random_tensor(2, 4, 3), b = random_tensor(2, 4, 4);
  auto full = chen_combine(a, b);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto l = chen_level(a, b, n);
    auto f = full.level(n);
    for (std::size_t i = 0; i < l.size(); ++i) CHECK(l[i] == doctest::Approx(f[i]).epsilon(1e-14));
  }
}

TEST_CASE("group_inverse") {
  CHECK(group_inverse(GradedTensor::zero(3, 3)) == GradedTensor::zero(3, 3));
  GradedTensor a(1, 2);
  a.level(1)[0] = 1.5;
  a.level(2)[0] = 0.25;
  auto inv = group_inverse(a);
  CHECK(inv.level(1)[0] == doctest::Approx(-1.5));
  CHECK(inv.level(2)[0] == doctest::Approx(1.5 * 1.5 - 0.25));
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto t = random_tensor(1 + s % 3, 1 + s % 5, s);
    auto i = group_inverse(t);
    CHECK(max_entry(chen_combine(t, i)) <= 1e-10);
    CHECK(max_entry(chen_combine(i, t)) <= 1e-10);
  }
}

TEST_CASE("tensor_norm and scaling") {
  CHECK(tensor_norm(GradedTensor::zero(2, 2), 1) == 0.0);
  GradedTensor t(2, 2);
  t.level(1)[0] = 3.0;
  t.level(1)[1] = -4.0;
  CHECK(tensor_norm(t, 1) == 4.0);
  CHECK_THROWS_AS(tensor_norm(t, 3), ValidationError);
  t.level(2)[3] = 1.0;
  auto s = scale_levels(t, 0.5);
  CHECK(s.level(1)[1] == -2.0);
  CHECK(s.level(2)[3] == 0.25);
}

TEST_CASE("level cap refuses oversized tensors") {
  CHECK_THROWS_AS(GradedTensor(10, 7), BudgetError);
  CHECK_NOTHROW(GradedTensor(10, 6));
  CHECK_THROWS_AS(GradedTensor(2, 0), ValidationError);
}
