#include <cmath>

#include "doctest.h"
#include "nerm/optimizers.hpp"
#include "nerm/rng.hpp"
#include "nerm/synth.hpp"
#include "nerm/tasks.hpp"

using namespace nerm;

namespace {

Sample plain_sample(SparseVector x, double label, std::size_t index = 0) {
  Sample s;
  s.index = index;
  s.x_hat = x;
  s.x_bar = std::move(x);
  s.label = label;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("optimizers");

TEST_CASE("stepsize schedule") {
  CHECK(StepSchedule{2.0, 8.0}.eta(2) == doctest::Approx(0.2).epsilon(1e-15));
  const StepSchedule paper{2.0 / 1e-2, 100.0};  // c = 2/lambda
  CHECK(paper.eta(1) == doctest::Approx(200.0 / 101.0).epsilon(1e-15));
  double prev = 1e300;
  for (std::int64_t t = 1; t < 200; ++t) {
    const double eta = paper.eta(t);
    CHECK(eta < prev);
    prev = eta;
  }
}

TEST_CASE("sgd step") {
  SUBCASE("eta 0 leaves theta unchanged") {
    DenseVector theta{0.5, -0.5};
    sgd_step(theta, plain_sample(SparseVector({0}, {1.0}), 1.0),
             LossKind::squared, RegSpec{0.1, 0.0}, 0.0);
    CHECK(theta == DenseVector{0.5, -0.5});
  }
  SUBCASE("zero derivative and zero lambda2 leave theta unchanged") {
    DenseVector theta{1.0, 0.0};
    // squared loss at u == label has derivative 0
    sgd_step(theta, plain_sample(SparseVector({0}, {1.0}), 1.0),
             LossKind::squared, RegSpec{0.0, 0.0}, 0.3);
    CHECK(theta == DenseVector{1.0, 0.0});
  }
  SUBCASE("one step on a 3-dim toy matches hand arithmetic") {
    // theta = [0.5,-0.5,1], x = {0:1, 2:2}, squared loss, y=1:
    // u = 2.5, d = 3; with lambda2=0.1, eta=0.2 the update is
    // theta <- 0.98*theta - 0.6*x, i.e. [-0.11, -0.49, -0.22]
    DenseVector theta{0.5, -0.5, 1.0};
    sgd_step(theta, plain_sample(SparseVector({0, 2}, {1.0, 2.0}), 1.0),
             LossKind::squared, RegSpec{0.1, 0.0}, 0.2);
    CHECK(theta[0] == doctest::Approx(-0.11).epsilon(1e-14));
    CHECK(theta[1] == doctest::Approx(-0.49).epsilon(1e-14));
    CHECK(theta[2] == doctest::Approx(-0.22).epsilon(1e-14));
  }
}

TEST_CASE("ssag first step reduces to the sgd gradient") {
  RngStream rng(21, 0);
  DenseVector theta(4);
  for (double& v : theta) v = 2.0 * rng.next_double() - 1.0;
  const RegSpec reg{0.05, 0.0};
  const StepSchedule sched{2.0, 10.0};
  const Sample s = plain_sample(SparseVector({1, 3}, {1.5, -0.5}), 1.0);

  SsagState st = make_ssag(theta, DenseVector{9.0, 9.0, 9.0, 9.0});  // any x~
  ssag_step(st, s, LossKind::logistic, reg, sched);

  DenseVector sgd_theta = theta;
  sgd_step(sgd_theta, s, LossKind::logistic, reg, sched.eta(1));
  for (std::size_t j = 0; j < theta.size(); ++j)
    CHECK(st.theta[j] == doctest::Approx(sgd_theta[j]).epsilon(1e-14));
}

TEST_CASE("ssag two scripted iterations match hand-expanded recurrences") {
  // d=2 toy, squared loss, lambda2=0, x~=[1,0.5], eta_t = 1/(1+t),
  // beta_t = t^(-0.75)
  const RegSpec reg{0.0, 0.0};
  const StepSchedule sched{1.0, 1.0};
  SsagState st = make_ssag(DenseVector{0.0, 0.0}, DenseVector{1.0, 0.5});
  CHECK(st.a == 0.0);

  // step 1: x = {0:2}, y=1 -> u=0, d=-4+2=-2; a=0 so v = d*x = [-4,0];
  // theta1 = [2,0]; beta1=1 wipes the averages: a~=-8, s=4, a=-2
  ssag_step(st, plain_sample(SparseVector({0}, {2.0}), 1.0), LossKind::squared,
            reg, sched);
  CHECK(st.theta[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.theta[1] == 0.0);
  CHECK(st.a_num == doctest::Approx(-8.0).epsilon(1e-15));
  CHECK(st.a_den == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(st.a == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(st.t == 2);

  // step 2: x = {0:1, 1:1}, y=-1 -> u=2, d=6;
  // v = (6-(-2))*x + (-2)*x~ = [8-2, 8-1] = [6,7]; theta2 = [0, -7/3];
  // beta2 = 2^(-0.75): a~ = (1-b)(-8)+b*12, s = (1-b)4+2b
  ssag_step(st, plain_sample(SparseVector({0, 1}, {1.0, 1.0}), -1.0),
            LossKind::squared, reg, sched);
  const double b = std::pow(2.0, -0.75);
  CHECK(st.theta[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(st.theta[1] == doctest::Approx(-7.0 / 3.0).epsilon(1e-15));
  CHECK(st.a_num == doctest::Approx(-8.0 + 20.0 * b).epsilon(1e-14));
  CHECK(st.a_den == doctest::Approx(4.0 - 2.0 * b).epsilon(1e-14));
  CHECK(st.a ==
        doctest::Approx((-8.0 + 20.0 * b) / (4.0 - 2.0 * b)).epsilon(1e-14));
}

TEST_CASE("ssag falls back to a=0 on all-zero samples") {
  SsagState st = make_ssag(DenseVector{0.0}, DenseVector{0.0});
  ssag_step(st, plain_sample(SparseVector(), 1.0), LossKind::logistic,
            RegSpec{0.0, 0.0}, StepSchedule{1.0, 1.0});
  CHECK(st.a == 0.0);
  CHECK(st.degenerate_steps == 1);
}

TEST_CASE("ssaga init") {
  SUBCASE("n=1: m0 = a1 * xbar1") {
    std::vector<SparseVector> rows{SparseVector({0}, {1.5})};
    const SparseDataset ds = SparseDataset::from_rows(1, rows, {1.0});
    RngStream rng(1, 1);
    const SsagaState st = ssaga_init(ds, DenseVector{0.0}, LossKind::squared,
                                     NoiseSpec::none(), rng);
    CHECK(st.a_table[0] == doctest::Approx(-2.0));  // phi'(0) = -2y
    CHECK(st.m[0] == doctest::Approx(-3.0));
  }
  SUBCASE("noise none, squared, theta0=0: a_i = -2 y_i, m0 by hand") {
    std::vector<SparseVector> rows{SparseVector({0}, {1.0}),
                                   SparseVector({1}, {2.0})};
    const SparseDataset ds = SparseDataset::from_rows(2, rows, {1.0, -1.0});
    RngStream rng(1, 2);
    const SsagaState st = ssaga_init(ds, DenseVector{0.0, 0.0},
                                     LossKind::squared, NoiseSpec::none(), rng);
    CHECK(st.a_table[0] == doctest::Approx(-2.0));
    CHECK(st.a_table[1] == doctest::Approx(2.0));
    CHECK(st.m[0] == doctest::Approx(-1.0));  // (a1*1 + 0)/2
    CHECK(st.m[1] == doctest::Approx(2.0));   // (0 + a2*2)/2
  }
  SUBCASE("same seed reproduces the same a-table under dropout") {
    RngStream data_rng(4, 0);
    const SparseDataset ds =
        make_random_sparse_dataset(6, 8, 2, 4, data_rng, 0.5);
    RngStream r1(55, 3), r2(55, 3);
    const SsagaState a = ssaga_init(ds, DenseVector(8, 0.1),
                                    LossKind::logistic,
                                    NoiseSpec::dropout(0.3), r1);
    const SsagaState b = ssaga_init(ds, DenseVector(8, 0.1),
                                    LossKind::logistic,
                                    NoiseSpec::dropout(0.3), r2);
    CHECK(a.a_table == b.a_table);
    CHECK(a.m == b.m);
  }
}

TEST_CASE("ssaga step") {
  SUBCASE("zero innovation leaves m unchanged") {
    std::vector<SparseVector> rows{SparseVector({0}, {1.0}),
                                   SparseVector({1}, {2.0})};
    const SparseDataset ds = SparseDataset::from_rows(2, rows, {1.0, -1.0});
    RngStream rng(2, 0);
    SsagaState st = ssaga_init(ds, DenseVector{0.0, 0.0}, LossKind::squared,
                               NoiseSpec::none(), rng);
    const DenseVector m_before = st.m;
    const DenseVector theta_before = st.theta;
    // theta is still theta0, so d == a_0 and the innovation vanishes;
    // v = m + lambda2*theta
    const RegSpec reg{0.0, 0.0};
    const StepSchedule sched{1.0, 1.0};  // eta1 = 0.5
    Sample s = plain_sample(rows[0], 1.0, 0);
    ssaga_step(st, s, LossKind::squared, reg, sched);
    CHECK(st.m == m_before);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(st.theta[j] ==
            doctest::Approx(theta_before[j] - 0.5 * m_before[j])
                .epsilon(1e-15));
  }
  SUBCASE("one scripted step on n=2, d=2 matches hand arithmetic") {
    std::vector<SparseVector> rows{SparseVector({0}, {1.0}),
                                   SparseVector({1}, {2.0})};
    const SparseDataset ds = SparseDataset::from_rows(2, rows, {1.0, -1.0});
    RngStream rng(2, 1);
    SsagaState st = ssaga_init(ds, DenseVector{1.0, -1.0}, LossKind::squared,
                               NoiseSpec::none(), rng);
    // theta0=[1,-1]: a = [2(1-1), 2(-2+1)] = [0,-2]; m = [0,-2]
    CHECK(st.a_table[0] == doctest::Approx(0.0));
    CHECK(st.a_table[1] == doctest::Approx(-2.0));
    CHECK(st.m[0] == doctest::Approx(0.0));
    CHECK(st.m[1] == doctest::Approx(-2.0));

    // scripted perturbed sample for index 0: x_hat = {0:0.5, 1:1}, y = 1
    // u = 0.5 - 1 = -0.5, d = -3; v = -3*x_hat + m = [-1.5, -5];
    // eta1 = 0.5 -> theta1 = [1.75, 1.5];
    // m <- m + (1/2)(d - 0)*xbar_0 = [-1.5, -2]; a_0 <- -3
    Sample s;
    s.index = 0;
    s.x_hat = SparseVector({0, 1}, {0.5, 1.0});
    s.x_bar = rows[0];
    s.label = 1.0;
    ssaga_step(st, s, LossKind::squared, RegSpec{0.0, 0.0},
               StepSchedule{1.0, 1.0});
    CHECK(st.theta[0] == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(st.theta[1] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(st.m[0] == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK(st.m[1] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(st.a_table[0] == doctest::Approx(-3.0));
  }
}

TEST_CASE("ssaga incremental m stays consistent over many steps") {
  RngStream data_rng(31, 0);
  const SparseDataset ds =
      make_random_sparse_dataset(20, 12, 2, 6, data_rng, 0.5);
  const NoiseSpec noise = NoiseSpec::dropout(0.3);
  const ErmTask task =
      make_erm_task(ds, LossKind::logistic, RegSpec{1e-2, 0.0}, noise);
  RngStream init_rng(31, 1), draw_rng(31, 2);
  SsagaState st = ssaga_init(ds, DenseVector(ds.dim, 0.0), LossKind::logistic,
                             noise, init_rng);
  const StepSchedule sched{2.0 / 1e-2, 1000.0};
  for (int step = 0; step < 10000; ++step) {
    const Sample s = draw_erm_sample(task, draw_rng);
    ssaga_step(st, s, task.loss, task.reg, sched);
  }
  const DenseVector fresh = ssaga_recompute_m(st, ds, noise);
  double m_norm = 0.0;
  for (double v : st.m) m_norm += v * v;
  m_norm = std::sqrt(m_norm);
  for (std::size_t j = 0; j < ds.dim; ++j)
    CHECK(std::fabs(st.m[j] - fresh[j]) <= 1e-8 * (1.0 + m_norm));
}

TEST_CASE("adagrad steps") {
  SUBCASE("first step divides by epsilon plus |g|") {
    AdagradState st = make_adagrad(DenseVector{0.0, 0.0}, 0.1, 1e-8);
    // squared loss, u=0, y=1 -> d=-2, g=[-2,0]
    adagrad_step(st, plain_sample(SparseVector({0}, {1.0}), 1.0),
                 LossKind::squared, RegSpec{0.0, 0.0});
    CHECK(st.theta[0] ==
          doctest::Approx(0.1 * 2.0 / (1e-8 + 2.0)).epsilon(1e-14));
    CHECK(st.theta[1] == 0.0);
    CHECK(st.accumulator[0] == doctest::Approx(4.0));
  }
  SUBCASE("zero gradient changes nothing") {
    AdagradState st = make_adagrad(DenseVector{2.0}, 0.1);
    // squared hinge with margin 2 is flat
    adagrad_step(st, plain_sample(SparseVector({0}, {1.0}), 1.0),
                 LossKind::squared_hinge, RegSpec{0.0, 0.0});
    CHECK(st.theta == DenseVector{2.0});
  }
  SUBCASE("three scripted steps match hand arithmetic") {
    AdagradState st = make_adagrad(DenseVector{0.0}, 0.5, 0.0);
    const Sample s = plain_sample(SparseVector({0}, {1.0}), 1.0);
    const RegSpec reg{0.0, 0.0};
    // u=0, d=-2, acc=4, theta = 0 + 0.5*2/2 = 0.5
    adagrad_step(st, s, LossKind::squared, reg);
    CHECK(st.theta[0] == doctest::Approx(0.5).epsilon(1e-15));
    // u=0.5, d=-1, acc=5, theta = 0.5 + 0.5/sqrt(5)
    adagrad_step(st, s, LossKind::squared, reg);
    const double t2 = 0.5 + 0.5 / std::sqrt(5.0);
    CHECK(st.theta[0] == doctest::Approx(t2).epsilon(1e-14));
    // u=t2, d=2(t2-1), acc=5+d^2, theta = t2 - 0.5*d/sqrt(acc)
    const double d3 = 2.0 * (t2 - 1.0);
    const double t3 = t2 - 0.5 * d3 / std::sqrt(5.0 + d3 * d3);
    adagrad_step(st, s, LossKind::squared, reg);
    CHECK(st.theta[0] == doctest::Approx(t3).epsilon(1e-14));
  }
}

TEST_CASE("iterate averaging") {
  SUBCASE("first update absorbs theta0 exactly") {
    AveragerState st;
    st.gamma = 7.5;
    const DenseVector theta0{1.25, -3.5};
    average_update(st, theta0);
    CHECK(st.theta_bar == theta0);
  }
  SUBCASE("constant iterates are a fixed point") {
    AveragerState st;
    st.gamma = 3.0;
    const DenseVector v{0.7, -0.3};
    for (int t = 0; t < 25; ++t) average_update(st, v);
    CHECK(st.theta_bar[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(st.theta_bar[1] == doctest::Approx(-0.3).epsilon(1e-14));
  }
  SUBCASE("online recurrence equals the closed form at T=5, gamma=3") {
    RngStream rng(13, 13);
    std::vector<DenseVector> thetas;
    for (int t = 0; t < 5; ++t) {
      DenseVector v(3);
      for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
      thetas.push_back(v);
    }
    AveragerState st;
    st.gamma = 3.0;
    for (const auto& th : thetas) average_update(st, th);
    const double scale = 2.0 / (5.0 * (2.0 * 3.0 + 5.0 - 1.0));
    for (std::size_t j = 0; j < 3; ++j) {
      double closed = 0.0;
      for (int t = 0; t < 5; ++t) closed += (3.0 + t) * thetas[t][j];
      closed *= scale;
      CHECK(st.theta_bar[j] == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("proximal step composes with the gradient update") {
  SUBCASE("lambda1 = 0 reproduces the plain update exactly") {
    DenseVector plain{0.4, -0.8};
    DenseVector with_prox = plain;
    const Sample s = plain_sample(SparseVector({0}, {1.0}), 1.0);
    sgd_step(plain, s, LossKind::logistic, RegSpec{0.1, 0.0}, 0.3);
    sgd_step(with_prox, s, LossKind::logistic, RegSpec{0.1, 0.0}, 0.3);
    CHECK(plain == with_prox);
    CHECK(proximal_apply(RegSpec{0.1, 0.0}, 0.3, plain) == plain);
  }
  SUBCASE("small coordinates are thresholded to exact zeros") {
    SsagState st = make_ssag(DenseVector{0.01, 2.0}, DenseVector{0.0, 0.0});
    // flat loss region: squared hinge with u >= 1 keeps d = 0, so the step
    // is pure prox with tau = eta*lambda1
    ssag_step(st, plain_sample(SparseVector({1}, {1.0}), 1.0),
              LossKind::squared_hinge, RegSpec{0.0, 0.5},
              StepSchedule{1.0, 9.0});  // eta1 = 0.1, tau = 0.05
    CHECK(st.theta[0] == 0.0);
    CHECK(st.theta[1] == doctest::Approx(1.95));
  }
}

TEST_SUITE_END();
