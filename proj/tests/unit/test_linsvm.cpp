#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arsent/error.hpp"
#include "arsent/linsvm.hpp"
#include "arsent/random.hpp"
#include "oracles.hpp"

using namespace arsent;

namespace {

SvmModel model(std::vector<double> w, double b) {
  SvmModel m;
  m.w = std::move(w);
  m.b = b;
  return m;
}

std::vector<Polarity> polarities(const std::vector<int>& y) {
  std::vector<Polarity> out;
  for (int v : y) out.push_back(v > 0 ? Polarity::Positive : Polarity::Negative);
  return out;
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_NOTHROW(SvmParams{}.validate());
  CHECK_THROWS_AS((SvmParams{0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((SvmParams{1.0, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS((SvmParams{1.0, 1e-3, 0}).validate(), ValidationError);
}

TEST_CASE("decision, predict and margin") {
  const auto m = model({1, 0}, 0);
  CHECK(decision_value(m, std::vector<double>{2, 5}) == 2.0);
  CHECK(decision_value(m, std::vector<double>{0, 7}) == 0.0);
  CHECK(predict(m, std::vector<double>{2, 5}) == Polarity::Positive);
  CHECK(predict(m, std::vector<double>{-0.5, 0}) == Polarity::Negative);
  CHECK(predict(m, std::vector<double>{0, 3}) == Polarity::Negative);
  CHECK(margin(m) == doctest::Approx(2.0));
  CHECK(margin(model({3, 4}, 1)) == doctest::Approx(0.4));
  CHECK(margin(model({6, 8}, 1)) == doctest::Approx(0.2));
  CHECK_THROWS_AS(margin(model({0, 0}, 0)), DataError);
  CHECK_THROWS_AS(decision_value(m, std::vector<double>{1}), std::invalid_argument);

  const auto x = DocTermMatrix::from_dense({{0, 3}}, {Polarity::Positive});
  CHECK(decision_value(model({1, 2}, 1), x.row(0)) == 5.0);
}

TEST_CASE("one-dimensional max-margin solution") {
  const auto x = DocTermMatrix::from_dense({{1}, {-1}}, {Polarity::Positive, Polarity::Negative});
  SvmParams p;
  p.C = 100;
  p.tolerance = 1e-2;
  const auto m = train(x, p);
  CHECK(m.w[0] == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(m.b) < 1e-2);
  CHECK(m.converged);
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(train(DocTermMatrix::from_dense({{1}}, {Polarity::Positive})), DataError);
  CHECK_THROWS_AS(train(DocTermMatrix::from_dense({{1}, {2}}, {Polarity::Positive, Polarity::Positive})), DataError);
}

TEST_CASE("objective matches a grid search on small fixtures") {
  Rng rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 4 + rng.below(6);
    oracle::Dense x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      y.push_back(i == 0 ? 1 : i == 1 ? -1 : (rng.below(2) ? 1 : -1));
      x.push_back({static_cast<double>(rng.below(5)) * 0.5 - 1.0});
    }
    const double C = trial % 2 ? 1.0 : 0.3;
    SvmParams p;
    p.C = C;
    p.tolerance = 1e-6;
    const auto m = train(DocTermMatrix::from_dense(x, polarities(y)), p);
    const auto g = oracle::grid_search(x, y, C, -4.0, 4.0, 0.005);
    CHECK(m.objective <= g.objective + 1e-3);
    CHECK(m.objective == doctest::Approx(oracle::primal(m.w, m.b, x, y, C)));
  }
}

TEST_CASE("KKT conditions and dual consistency") {
  Rng rng(17);
  oracle::Dense x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int cls = i % 2 ? 1 : -1;
    y.push_back(cls);
    x.push_back({cls * 0.5 + static_cast<double>(rng.below(100)) / 50.0 - 1.0,
                 static_cast<double>(rng.below(100)) / 50.0 - 1.0, static_cast<double>(rng.below(3))});
  }
  SvmParams p;
  p.C = 2.0;
  p.tolerance = 1e-6;
  const auto mat = DocTermMatrix::from_dense(x, polarities(y));
  const auto m = train(mat, p);
  REQUIRE(m.alpha.size() == 40);
  std::vector<double> w(3, 0.0);
  double balance = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(m.alpha[i] >= 0.0);
    CHECK(m.alpha[i] <= p.C);
    balance += m.alpha[i] * y[i];
    for (std::size_t k = 0; k < 3; ++k) w[k] += m.alpha[i] * y[i] * x[i][k];
    const double f = y[i] * decision_value(m, mat.row(i));
    const double slack = 1e-4;
    if (m.alpha[i] < 1e-9) CHECK(f >= 1.0 - slack);
    else if (m.alpha[i] < p.C - 1e-9) CHECK(std::abs(f - 1.0) <= slack);
    else CHECK(f <= 1.0 + slack);
  }
  CHECK(std::abs(balance) < 1e-9);
  for (std::size_t k = 0; k < 3; ++k) CHECK(w[k] == doctest::Approx(m.w[k]).epsilon(1e-9));

  // Reordering the examples moves no weight by more than the tolerance scale.
  std::vector<std::size_t> order(40);
  for (std::size_t i = 0; i < 40; ++i) order[i] = 39 - i;
  const auto shuffled = train(select_rows(mat, order), p);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(shuffled.w[k] - m.w[k]) < 1e-3);
}

TEST_CASE("separable sets are fit exactly") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::Dense x;
    std::vector<int> y;
    const double a = static_cast<double>(rng.below(7)) - 3.0, c = static_cast<double>(rng.below(7)) - 3.0;
    while (x.size() < 20) {
      const double u = static_cast<double>(rng.below(200)) / 20.0 - 5.0;
      const double v = static_cast<double>(rng.below(200)) / 20.0 - 5.0;
      const double s = a * u + c * v + 0.5;
      if (std::abs(s) < 0.5) continue;
      x.push_back({u, v});
      y.push_back(s > 0 ? 1 : -1);
    }
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) continue;
    SvmParams p;
    p.C = 1000;
    const auto mat = DocTermMatrix::from_dense(x, polarities(y));
    const auto m = train(mat, p);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(predict(m, mat.row(i)) == mat.label(i));
  }
}

TEST_CASE("model dump round trip") {
  SvmModel m = model({0.1, -2.5e-17, 1.0 / 3.0}, -0.7);
  m.C = 2.0;
  m.tolerance = 1e-4;
  m.objective = 12.25;
  std::ostringstream os;
  write_model(os, m);
  CHECK(os.str().rfind("linsvm", 0) == 0);
  std::istringstream is(os.str());
  const SvmModel back = read_model(is);
  CHECK(back.w == m.w);
  CHECK(back.b == m.b);
  CHECK(back.C == m.C);
  CHECK(back.tolerance == m.tolerance);
  CHECK(back.objective == m.objective);

  std::istringstream bad("linsvm 2 1 0.001 0\n0 1\n");
  CHECK_THROWS_AS(read_model(bad), DataError);
}
