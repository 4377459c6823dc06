#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "nashseek/control.hpp"
#include "nashseek/error.hpp"
#include "nashseek/graph.hpp"

using namespace nashseek;

namespace {

GainSet example1_gains() {
  GainSet g;
  g.order_n = 2;
  g.k = default_hurwitz_gains(2);
  g.epsilon = 2.0;
  g.alpha1 = 3.0;
  g.alpha2 = 2.2;
  g.alpha3 = 18.0;
  return g;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(DefaultGains, BinomialCoefficients) {
  EXPECT_EQ(default_hurwitz_gains(2), vec({1}));
  EXPECT_EQ(default_hurwitz_gains(4), vec({1, 3, 3}));
  EXPECT_EQ(default_hurwitz_gains(1).size(), 0);
  EXPECT_EQ(default_observer_gains(2), vec({2, 1}));
  EXPECT_EQ(default_observer_gains(4), vec({4, 6, 4, 1}));
}

TEST(Companion, Examples) {
  Matrix one(1, 1);
  one << -1;
  EXPECT_EQ(companion_matrix(vec({1})), one);

  Matrix two(2, 2);
  two << 0, 1, -2, -3;
  EXPECT_EQ(companion_matrix(vec({2, 3})), two);
  const auto roots = Eigen::EigenSolver<Matrix>(two).eigenvalues();
  EXPECT_NEAR(std::min(roots(0).real(), roots(1).real()), -2.0, 1e-12);
  EXPECT_NEAR(std::max(roots(0).real(), roots(1).real()), -1.0, 1e-12);

  const auto triple = Eigen::EigenSolver<Matrix>(companion_matrix(vec({1, 3, 3}))).eigenvalues();
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(triple(i) + 1.0), 0.0, 1e-4);

  EXPECT_THROW((void)companion_matrix(Vector(0)), Error);
}

TEST(Routh, Examples) {
  const std::vector<double> stable{1, 3, 2};
  const std::vector<double> unstable{1, -1};
  const std::vector<double> marginal{1, 0, 1};
  EXPECT_TRUE(routh_hurwitz_stable(stable));
  EXPECT_FALSE(routh_hurwitz_stable(unstable));
  EXPECT_FALSE(routh_hurwitz_stable(marginal));
}

TEST(Routh, ZeroInFirstColumnIsNotStable) {
  // s³ + s² + s + 1 = (s + 1)(s² + 1): zero row in the array.
  const std::vector<double> zero_row{1, 1, 1, 1};
  // s⁴ + s³ + 2s² + 2s + 1: zero pivot in the first column.
  const std::vector<double> zero_pivot{1, 1, 2, 2, 1};
  EXPECT_FALSE(routh_hurwitz_stable(zero_row));
  EXPECT_FALSE(routh_hurwitz_stable(zero_pivot));
}

TEST(Routh, DefaultPolynomialsStableUpToEight) {
  for (std::size_t n = 2; n <= 8; ++n) {
    EXPECT_TRUE(routh_hurwitz_stable(characteristic_coefficients(default_hurwitz_gains(n)))) << n;
    const Vector beta = default_observer_gains(n);
    std::vector<double> coeffs{1.0};
    for (Eigen::Index l = 0; l < beta.size(); ++l) coeffs.push_back(beta(l));
    EXPECT_TRUE(routh_hurwitz_stable(coeffs)) << n;
  }
}

TEST(Routh, AgreesWithEigenvaluesOnRandomPolynomials) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coeff(-1.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    Vector k(3);
    for (Eigen::Index i = 0; i < 3; ++i) k(i) = coeff(rng);
    const auto eig = Eigen::EigenSolver<Matrix>(companion_matrix(k)).eigenvalues();
    const double max_re = eig.real().maxCoeff();
    if (std::abs(max_re) < 1e-6) continue;
    EXPECT_EQ(routh_hurwitz_stable(characteristic_coefficients(k)), max_re < 0.0) << k.transpose();
  }
}

TEST(LyapunovP, ScalarExample) {
  Matrix a(1, 1);
  a << -1;
  EXPECT_NEAR(lyapunov_P(a)(0, 0), 0.5, 1e-15);
  Matrix bad(1, 1);
  bad << 1;
  EXPECT_THROW((void)lyapunov_P(bad), Error);
}

TEST(LyapunovP, ResidualAndDefinitenessUpToEight) {
  for (std::size_t n = 2; n <= 8; ++n) {
    const Matrix a = companion_matrix(default_hurwitz_gains(n));
    const Matrix p = lyapunov_P(a);
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    EXPECT_LT((p * a + a.transpose() * p + id).norm(), 1e-10) << n;
    EXPECT_TRUE(is_symmetric_positive_definite(p)) << n;
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
  const Matrix a = companion_matrix(vec({2, 3}));
  const Matrix p = lyapunov_P(a);
  EXPECT_LT((p * a + a.transpose() * p + Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(GainOrdering, Examples) {
  GainSet desk;
  desk.order_n = 4;
  desk.epsilon = 2;
  desk.alpha2 = 10;
  desk.alpha1 = 14;
  EXPECT_TRUE(check_gain_ordering(desk).passes());
  EXPECT_TRUE(check_gain_ordering(desk).warning.empty());

  GainSet high_gain = desk;
  high_gain.epsilon = 20;
  high_gain.alpha2 = 400;
  high_gain.alpha1 = 500;
  const GainOrderingReport r = check_gain_ordering(high_gain);
  EXPECT_FALSE(r.passes());
  EXPECT_FALSE(r.lower_ok);
  EXPECT_FALSE(r.warning.empty());

  GainSet first;
  first.order_n = 1;
  first.epsilon = 2;
  first.alpha2 = 1.5;
  first.alpha1 = 1.8;
  EXPECT_TRUE(check_gain_ordering(first).passes());
}

TEST(GainValidation, RejectsNonHurwitzAndNonPositive) {
  GainSet g = example1_gains();
  EXPECT_NO_THROW(validate(g));
  g.k = vec({-1});
  EXPECT_THROW(validate(g), Error);
  g = example1_gains();
  g.alpha3 = 0.0;
  EXPECT_THROW(validate(g), Error);
  ObserverSet obs{vec({2, 1}), 0.02};
  EXPECT_NO_THROW(validate(obs, 2));
  obs.beta = vec({0, 1});
  EXPECT_THROW(validate(obs, 2), Error);
}

TEST(StateFeedback, ExampleOneSubstitution) {
  const GainSet gains = example1_gains();
  RowMatrix plant(2, 2);
  plant << 0.7, -1.1, 0.4, 2.5;  // x, v
  SeekerState seeker{vec({0.3, -0.6}), RowMatrix::Zero(3, 2), RowMatrix()};
  const Vector grad = vec({1.5, -2.0});
  const StateFeedbackOutput out = state_feedback_rhs(plant, seeker, grad, {}, gains);
  const Vector v = plant.row(1).transpose();
  EXPECT_LT(inf_norm(out.u - (-2.0 * v - 3.0 * grad - 2.2 * seeker.y)), 1e-15);
  EXPECT_LT(inf_norm(out.dy - (v + 1.5 * grad)), 1e-15);
}

TEST(StateFeedback, ZeroStateIsRest) {
  const GainSet gains = example1_gains();
  SeekerState seeker{Vector::Zero(2), RowMatrix::Zero(3, 2), RowMatrix()};
  const StateFeedbackOutput out = state_feedback_rhs(RowMatrix::Zero(2, 2), seeker, Vector::Zero(2), {}, gains);
  EXPECT_EQ(out.u, Vector::Zero(2));
  EXPECT_EQ(out.dy, Vector::Zero(2));
  EXPECT_EQ(out.dx_hat, RowMatrix::Zero(3, 2));
}

TEST(StateFeedback, DimensionMismatchThrows) {
  const GainSet gains = example1_gains();
  SeekerState seeker{Vector::Zero(2), RowMatrix::Zero(3, 2), RowMatrix()};
  EXPECT_THROW((void)state_feedback_rhs(RowMatrix::Zero(3, 2), seeker, Vector::Zero(2), {}, gains), Error);
  EXPECT_THROW((void)state_feedback_rhs(RowMatrix::Zero(2, 2), seeker, Vector::Zero(3), {}, gains), Error);
}

TEST(EstimateDynamics, TwoPlayerAnchorExample) {
  // Player 1 (index 0) hears only player 2 with a₁₂ = 1. Its estimate of
  // player 2 is 1; player 2's own estimate of itself is 0 and x₂ = 0.
  RowMatrix mine(2, 1);
  mine << 0.0, 1.0;
  RowMatrix theirs(2, 1);
  theirs << 0.0, 0.0;
  const Vector x2 = Vector::Zero(1);
  const NeighborMessage msg{1, 1.0, theirs, x2};
  const RowMatrix d = estimate_dynamics(mine, std::span<const NeighborMessage>(&msg, 1), 1.0);
  EXPECT_DOUBLE_EQ(d(1, 0), -2.0);
  EXPECT_DOUBLE_EQ(d(0, 0), 0.0);
}

TEST(EstimateDynamics, ConsensusIsFixedPoint) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 6);
    const Digraph g = random_strongly_connected_digraph(n, rng, 0.4);
    RowMatrix truth(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < truth.size(); ++i) truth.data()[i] = coord(rng);
    std::vector<RowMatrix> estimates(n, truth);
    std::vector<Vector> decisions;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) decisions.emplace_back(truth.row(i).transpose());
    for (std::size_t i = 0; i < n; ++i) {
      const auto msgs = gather_messages(g, i, estimates, decisions);
      EXPECT_EQ(estimate_dynamics(estimates[i], msgs, 40.0), RowMatrix::Zero(truth.rows(), 2));
    }
  }
}

TEST(OutputFeedback, ObserverGainExample) {
  GainSet gains = example1_gains();
  const ObserverSet obs{vec({2, 1}), 0.02};
  RowMatrix z(2, 1);
  z << 0.25, -0.5;
  SeekerState seeker{Vector::Zero(1), RowMatrix::Zero(2, 1), z};
  const Vector x = vec({1.0});
  const OutputFeedbackOutput out = output_feedback_rhs(x, seeker, Vector::Zero(1), {}, gains, obs);
  EXPECT_NEAR(out.dz_chain(0, 0), -0.5 + 200.0 * (1.0 - 0.25), 1e-12);
  EXPECT_NEAR(out.dz_chain(1, 0), 10000.0 * (1.0 - 0.25), 1e-9);
}

TEST(OutputFeedback, ObserverAtRestOnTruth) {
  const GainSet gains = example1_gains();
  const ObserverSet obs{vec({2, 1}), 0.02};
  const Vector x = vec({1.5, -0.5});
  RowMatrix z = RowMatrix::Zero(2, 2);
  z.row(0) = x.transpose();
  SeekerState seeker{vec({0.2, 0.1}), RowMatrix::Zero(3, 2), z};
  const Vector grad = vec({-1.0, 4.0});
  const OutputFeedbackOutput out = output_feedback_rhs(x, seeker, grad, {}, gains, obs);
  EXPECT_EQ(out.dz_chain, RowMatrix::Zero(2, 2));
  EXPECT_LT(inf_norm(out.u - (-3.0 * grad - 2.2 * seeker.y)), 1e-15);
}

TEST(OutputFeedback, MatchesStateFeedbackWhenObserverIsExact) {
  GainSet gains;
  gains.order_n = 4;
  gains.k = default_hurwitz_gains(4);
  gains.epsilon = 2;
  gains.alpha1 = 14;
  gains.alpha2 = 10;
  gains.alpha3 = 40;
  RowMatrix chain(4, 1);
  chain << 3.0, -1.0, 0.5, 0.25;
  const Vector grad = vec({0.7});
  const Vector y = vec({-0.2});
  for (double mu : {0.04, 0.02, 0.01}) {
    const ObserverSet obs{default_observer_gains(4), mu};
    const SeekerState with_observer{y, RowMatrix::Zero(2, 1), chain};
    const SeekerState plain{y, RowMatrix::Zero(2, 1), RowMatrix()};
    const auto o = output_feedback_rhs(chain.row(0).transpose(), with_observer, grad, {}, gains, obs);
    const auto s = state_feedback_rhs(chain, plain, grad, {}, gains);
    EXPECT_LT(inf_norm(o.u - s.u), 1e-13);
    EXPECT_LT(inf_norm(o.dy - s.dy), 1e-13);
  }
}

TEST(FirstOrderPlants, EmptySums) {
  GainSet gains;
  gains.order_n = 1;
  gains.k = default_hurwitz_gains(1);
  gains.epsilon = 2;
  gains.alpha1 = 1.8;
  gains.alpha2 = 1.5;
  gains.alpha3 = 1;
  EXPECT_NO_THROW(validate(gains));
  RowMatrix plant(1, 1);
  plant << 4.0;
  SeekerState seeker{vec({0.5}), RowMatrix::Zero(1, 1), RowMatrix()};
  const StateFeedbackOutput s = state_feedback_rhs(plant, seeker, vec({2.0}), {}, gains);
  EXPECT_DOUBLE_EQ(s.u(0), -1.8 * 2.0 - 1.5 * 0.5);
  EXPECT_DOUBLE_EQ(s.dy(0), 1.8 * 2.0);

  const ObserverSet obs{default_observer_gains(1), 0.1};
  RowMatrix z(1, 1);
  z << 3.0;
  SeekerState with_z{vec({0.5}), RowMatrix::Zero(1, 1), z};
  const OutputFeedbackOutput o = output_feedback_rhs(vec({4.0}), with_z, vec({2.0}), {}, gains, obs);
  EXPECT_DOUBLE_EQ(o.u(0), s.u(0));
  EXPECT_NEAR(o.dz_chain(0, 0), (2.0 / 0.1) * 1.0 * (4.0 - 3.0), 1e-12);
}
