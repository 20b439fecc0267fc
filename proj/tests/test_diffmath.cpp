#include <cmath>

#include <doctest.h>

#include "lrf/optim.hpp"
#include "lrf/tape.hpp"
#include "support/oracles.hpp"

using namespace lrf;

namespace {

Tensor rand_tensor(std::vector<std::int64_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_SUITE("diffmath") {

TEST_CASE("linear identity and bias pass-through") {
  Tape tape;
  ValueId x = tape.constant(Tensor({1, 2}, {1.0, 2.0}));
  ValueId w = tape.constant(Tensor({2, 2}, {1.0, 0.0, 0.0, 1.0}));
  ValueId b = tape.constant(Tensor({2}));
  const Tensor& y = tape.val(tape.linear(x, w, b));
  CHECK(y.at(0, 0) == 1.0);
  CHECK(y.at(0, 1) == 2.0);

  Rng rng(3);
  Tape t2;
  ValueId zx = t2.constant(Tensor({1, 4}));
  ValueId zw = t2.constant(rand_tensor({4, 4}, rng));
  Tensor bias = rand_tensor({4}, rng);
  const Tensor& out = t2.val(t2.linear(zx, zw, t2.constant(bias)));
  // zero input: every output entry equals its bias, exactly
  for (int j = 0; j < 4; ++j) CHECK(out.at(0, j) == bias[j]);
}

TEST_CASE("linear hand arithmetic") {
  Tape tape;
  ValueId x = tape.constant(Tensor({1, 2}, {1.0, 1.0}));
  ValueId w = tape.constant(Tensor({2, 2}, {2.0, 0.0, 0.0, 3.0}));
  ValueId b = tape.constant(Tensor({2}, {1.0, 1.0}));
  const Tensor& y = tape.val(tape.linear(x, w, b));
  CHECK(y.at(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(y.at(0, 1) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("linear dimension error names both shapes") {
  Tape tape;
  ValueId x = tape.constant(Tensor({2, 3}));
  ValueId w = tape.constant(Tensor({4, 5}));
  ValueId b = tape.constant(Tensor({5}));
  try {
    tape.linear(x, w, b);
    FAIL("expected DimError");
  } catch (const DimError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x5") != std::string::npos);
  }
}

TEST_CASE("conv2d 1x1 identity kernel is bit-exact identity") {
  Rng rng(11);
  const std::int64_t C = 3;
  Tensor w({C, C, 1, 1});
  for (std::int64_t c = 0; c < C; ++c) w.at(c, c, 0, 0) = 1.0;
  Tensor x = rand_tensor({C, 5, 7}, rng, -3.0, 3.0);
  Tape tape;
  const Tensor& y = tape.val(tape.conv2d(tape.constant(x), tape.constant(w), tape.constant(Tensor({C}))));
  REQUIRE(y.shape() == x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("conv2d all-ones kernel on constant input: interior 9, corner 4") {
  Tape tape;
  ValueId x = tape.constant(Tensor::full({1, 5, 5}, 1.0));
  ValueId w = tape.constant(Tensor::full({1, 1, 3, 3}, 1.0));
  ValueId b = tape.constant(Tensor({1}));
  ValueId y = tape.conv2d(x, w, b);
  const Tensor& out = tape.val(y);
  CHECK(out.at(0, 2, 2) == 9.0);
  CHECK(out.at(0, 0, 0) == 4.0);
  CHECK(out.at(0, 0, 4) == 4.0);
  CHECK(out.at(0, 4, 0) == 4.0);
  CHECK(out.at(0, 4, 4) == 4.0);
  CHECK(out.at(0, 0, 2) == 6.0);

  const Tensor ref = oracle::conv2d_dense(tape.val(x), tape.val(w), tape.val(b));
  for (std::int64_t i = 0; i < out.numel(); ++i) CHECK(out[i] == ref[i]);
}

TEST_CASE("conv2d matches the dense oracle on random tensors") {
  Rng rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    const std::int64_t Cin = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t Cout = 1 + static_cast<std::int64_t>(rng.below(4));
    const std::int64_t H = 3 + static_cast<std::int64_t>(rng.below(6));
    const std::int64_t W = 3 + static_cast<std::int64_t>(rng.below(6));
    const std::int64_t k = rng.below(2) ? 3 : 5;
    Tensor x = rand_tensor({Cin, H, W}, rng);
    Tensor w = rand_tensor({Cout, Cin, k, k}, rng);
    Tensor b = rand_tensor({Cout}, rng);
    Tape tape;
    const Tensor& y = tape.val(tape.conv2d(tape.constant(x), tape.constant(w), tape.constant(b)));
    const Tensor ref = oracle::conv2d_dense(x, w, b);
    for (std::int64_t i = 0; i < y.numel(); ++i)
      CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d zero input passes bias; bad configs throw") {
  Tape tape;
  const Tensor bias({3}, {0.5, -1.0, 2.0});
  ValueId y = tape.conv2d(tape.constant(Tensor({2, 4, 4})),
                          tape.constant(Tensor({3, 2, 3, 3})), tape.constant(bias));
  const Tensor& out = tape.val(y);
  for (std::int64_t c = 0; c < 3; ++c)
    for (std::int64_t i = 0; i < 16; ++i) CHECK(out[c * 16 + i] == bias[c]);

  CHECK_THROWS_AS(tape.conv2d(tape.constant(Tensor({2, 4, 4})),
                              tape.constant(Tensor({3, 2, 2, 2})), tape.constant(Tensor({3}))),
                  ConfigError);
  CHECK_THROWS_AS(tape.conv2d(tape.constant(Tensor({2, 4, 4})),
                              tape.constant(Tensor({3, 5, 3, 3})), tape.constant(Tensor({3}))),
                  DimError);
}

TEST_CASE("sigmoid values, symmetry, strict range") {
  Tape tape;
  ValueId y = tape.sigmoid(tape.constant(Tensor({1}, {0.0})));
  CHECK(tape.val(y)[0] == 0.5);

  ValueId big = tape.sigmoid(tape.constant(Tensor({1}, {20.0})));
  CHECK(std::fabs(tape.val(big)[0] - 1.0) < 1e-8);

  Rng rng(5);
  Tensor x = rand_tensor({64}, rng, -50.0, 50.0);
  Tensor neg = x;
  for (std::int64_t i = 0; i < neg.numel(); ++i) neg[i] = -neg[i];
  Tape t2;
  const Tensor& sx = t2.val(t2.sigmoid(t2.constant(x)));
  const Tensor& sn = t2.val(t2.sigmoid(t2.constant(neg)));
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    CHECK(sx[i] > 0.0);
    CHECK(sx[i] < 1.0);
    CHECK(sx[i] + sn[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("forward ops are deterministic") {
  Rng rng(23);
  Tensor x = rand_tensor({2, 3, 6, 6}, rng);
  Tensor w = rand_tensor({4, 3, 3, 3}, rng);
  Tensor b = rand_tensor({4}, rng);
  Tape t1, t2;
  const Tensor& y1 = t1.val(t1.sigmoid(t1.conv2d(t1.constant(x), t1.constant(w), t1.constant(b))));
  const Tensor& y2 = t2.val(t2.sigmoid(t2.conv2d(t2.constant(x), t2.constant(w), t2.constant(b))));
  for (std::int64_t i = 0; i < y1.numel(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("eltwise mul and channel concat") {
  Rng rng(29);
  Tensor a = rand_tensor({2, 3, 4, 4}, rng);
  Tape tape;
  ValueId av = tape.constant(a);
  ValueId ones = tape.constant(Tensor::full({2, 3, 4, 4}, 1.0));
  const Tensor& same = tape.val(tape.mul(av, ones));
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(same[i] == a[i]);

  Tensor b = rand_tensor({2, 5, 4, 4}, rng);
  ValueId cat = tape.concat_channels(av, tape.constant(b));
  CHECK(tape.val(cat).shape() == std::vector<std::int64_t>{2, 8, 4, 4});

  const Tensor& backa = tape.val(tape.slice_channels(cat, 0, 3));
  const Tensor& backb = tape.val(tape.slice_channels(cat, 3, 8));
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(backa[i] == a[i]);
  for (std::int64_t i = 0; i < b.numel(); ++i) CHECK(backb[i] == b[i]);

  CHECK_THROWS_AS(tape.mul(av, tape.constant(Tensor({2, 3, 4, 5}))), DimError);
  CHECK_THROWS_AS(tape.concat_channels(av, tape.constant(Tensor({2, 3, 5, 4}))), DimError);
}

TEST_CASE("backward of sum is all-ones; non-scalar loss rejected") {
  Rng rng(31);
  Param x("x", rand_tensor({3, 4}, rng));
  Tape tape;
  ValueId loss = tape.sum_all(tape.leaf(x));
  x.zero_grad();
  tape.backward(loss);
  for (std::int64_t i = 0; i < x.grad.numel(); ++i) CHECK(x.grad[i] == 1.0);

  Tape t2;
  ValueId vec = t2.constant(Tensor({3}));
  CHECK_THROWS_AS(t2.backward(vec), ContractError);
}

TEST_CASE("grad_check: 4x4 linear layer under random loss") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    Param w("w", rand_tensor({4, 4}, rng));
    Param b("b", rand_tensor({4}, rng));
    Tensor x = rand_tensor({3, 4}, rng);
    Tensor c = rand_tensor({3, 4}, rng);
    auto build = [&](Tape& t) {
      ValueId y = t.linear(t.constant(x), t.leaf(w), t.leaf(b));
      return t.sum_all(t.mul(y, t.constant(c)));
    };
    CHECK(grad_check(build, {&w, &b}, 1e-5) < 1e-4);
  }
}

TEST_CASE("grad_check: conv + sigmoid + eltwise-mul gate chain") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    Param w1("w1", rand_tensor({3, 4, 3, 3}, rng, -0.5, 0.5));
    Param b1("b1", rand_tensor({3}, rng, -0.2, 0.2));
    Param w2("w2", rand_tensor({3, 3, 3, 3}, rng, -0.5, 0.5));
    Param b2("b2", rand_tensor({3}, rng, -0.2, 0.2));
    Tensor x = rand_tensor({1, 4, 5, 5}, rng);
    Tensor v = rand_tensor({1, 3, 5, 5}, rng);
    Tensor c = rand_tensor({1, 3, 5, 5}, rng);
    auto build = [&](Tape& t) {
      ValueId h = t.conv2d(t.constant(x), t.leaf(w1), t.leaf(b1));
      ValueId gate = t.sigmoid(t.conv2d(h, t.leaf(w2), t.leaf(b2)));
      return t.sum_all(t.mul(t.mul(gate, t.constant(v)), t.constant(c)));
    };
    CHECK(grad_check(build, {&w1, &b1, &w2, &b2}, 1e-5) < 1e-4);
  }
}

TEST_CASE("grad_check: relu, mean, pooling, broadcast, scatter, gather") {
  Rng rng(55);
  Param w("w", rand_tensor({1, 2, 4, 4}, rng));
  Tensor c = rand_tensor({1, 2, 2, 2}, rng);
  auto build_pool = [&](Tape& t) {
    return t.sum_all(t.mul(t.avg_pool2x2(t.relu(t.leaf(w))), t.constant(c)));
  };
  CHECK(grad_check(build_pool, {&w}, 1e-5) < 1e-4);

  Param s("s", rand_tensor({1, 1, 3, 3}, rng));
  Tensor c2 = rand_tensor({1, 4, 3, 3}, rng);
  auto build_bcast = [&](Tape& t) {
    return t.mean_all(t.mul(t.broadcast_channels(t.leaf(s), 4), t.constant(c2)));
  };
  CHECK(grad_check(build_bcast, {&s}, 1e-5) < 1e-4);

  Param rows("rows", rand_tensor({3, 2}, rng));
  auto build_scatter = [&](Tape& t) {
    ValueId y = t.scatter_add(t.leaf(rows), {10}, {0, 4, 4, 9, 2, 5}, {1.0, 0.5, 2.0});
    return t.sum_all(t.mul(t.gather(y, {0, 2, 4, 5, 9}), t.constant(Tensor({5}, {1, -2, 3, -4, 5}))));
  };
  CHECK(grad_check(build_scatter, {&rows}, 1e-5) < 1e-4);
}

TEST_CASE("grad_check validates eps") {
  Param w("w", Tensor({1}, {1.0}));
  auto build = [&](Tape& t) { return t.sum_all(t.leaf(w)); };
  CHECK_THROWS_AS(grad_check(build, {&w}, 1e-3), ConfigError);
  CHECK_THROWS_AS(grad_check(build, {&w}, 1e-7), ConfigError);
}

TEST_CASE("avg_pool2x2 forward and errors") {
  Tape tape;
  Tensor x({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK(tape.val(tape.avg_pool2x2(tape.constant(x)))[0] == 2.5);
  CHECK_THROWS_AS(tape.avg_pool2x2(tape.constant(Tensor({1, 1, 3, 3}))), ConfigError);
}

TEST_CASE("sgd: definition, lr 0, summed-grad identity") {
  Param p("p", Tensor({1}, {1.0}));
  p.grad[0] = 2.0;
  SgdOptimizer opt(OptimConfig{0.1, false, 0.9});
  opt.step({&p});
  CHECK(p.value[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(opt.step_count() == 1);

  Param q("q", Tensor({2}, {1.0, -2.0}));
  q.grad[0] = 3.0;
  q.grad[1] = -1.0;
  SgdOptimizer frozen(OptimConfig{0.0, false, 0.9});
  frozen.step({&q});
  CHECK(q.value[0] == 1.0);
  CHECK(q.value[1] == -2.0);

  // two steps at constant grad g == one step at 2g
  Param a("a", Tensor({1}, {0.7}));
  Param b("b", Tensor({1}, {0.7}));
  SgdOptimizer oa(OptimConfig{0.05, false, 0.9}), ob(OptimConfig{0.05, false, 0.9});
  a.grad[0] = 0.3;
  oa.step({&a});
  a.grad[0] = 0.3;
  oa.step({&a});
  b.grad[0] = 0.6;
  ob.step({&b});
  CHECK(a.value[0] == doctest::Approx(b.value[0]).epsilon(1e-14));
}

TEST_CASE("sgd momentum variant and non-finite rejection") {
  Param p("p", Tensor({1}, {0.0}));
  SgdOptimizer opt(OptimConfig{1.0, true, 0.5});
  p.grad[0] = 1.0;
  opt.step({&p});  // v=1, p=-1
  CHECK(p.value[0] == doctest::Approx(-1.0));
  p.grad[0] = 1.0;
  opt.step({&p});  // v=1.5, p=-2.5
  CHECK(p.value[0] == doctest::Approx(-2.5));

  Param bad("bad", Tensor({1}, {0.0}));
  bad.grad[0] = std::nan("");
  SgdOptimizer o2(OptimConfig{0.1, false, 0.9});
  CHECK_THROWS_AS(o2.step({&bad}), NumericError);
}

TEST_CASE("param zero_grad restores the all-zero invariant") {
  Param p("p", Tensor({2, 2}, {1, 2, 3, 4}));
  Tape tape;
  tape.backward(tape.sum_all(tape.leaf(p)));
  CHECK(p.grad[0] == 1.0);
  p.zero_grad();
  for (std::int64_t i = 0; i < 4; ++i) CHECK(p.grad[i] == 0.0);
  CHECK(p.grad.shape() == p.value.shape());
}

TEST_CASE("finite inputs stay finite through the op set") {
  Rng rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    Tensor x = rand_tensor({1, 3, 6, 6}, rng, -30.0, 30.0);
    Tensor w = rand_tensor({3, 3, 3, 3}, rng, -2.0, 2.0);
    Tensor b = rand_tensor({3}, rng, -2.0, 2.0);
    Tape t;
    ValueId y = t.mul(t.sigmoid(t.conv2d(t.constant(x), t.constant(w), t.constant(b))),
                      t.relu(t.constant(x)));
    CHECK(t.val(y).all_finite());
    CHECK(t.val(t.mean_all(y)).all_finite());
  }
}

}  // TEST_SUITE
