#include "helpers.hpp"

#include "distress/classifiers.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

using namespace distress;

namespace {

struct Sample {
    Matrix X;
    Labels y;
};

Sample logistic_sample(std::size_t n, const Vector& beta, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    Sample s{Matrix(n, beta.size() - 1), Labels(n)};
    for (std::size_t i = 0; i < n; ++i) {
        double eta = beta(0);
        for (Eigen::Index j = 1; j < beta.size(); ++j) {
            s.X(i, j - 1) = normal(rng);
            eta += beta(j) * s.X(i, j - 1);
        }
        s.y(i) = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    return s;
}

}  // namespace

TEST_CASE("hazard fit recovers coefficients and its derivatives are consistent")
{
    const Vector beta = (Vector(3) << 0.5, -1.0, 2.0).finished();
    const auto s = logistic_sample(5000, beta, 1);
    const auto model = hazard_fit(s.X, s.y, {}, {"A", "B"});
    CHECK(model.gradient_norm < 1e-8);
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(std::abs(model.beta(j) - beta(j)) < 0.2);
    }
    CHECK(model.log_lik_fit > model.log_lik_null);

    const Vector at = (Vector(3) << 0.1, 0.2, -0.3).finished();
    const Vector g = hazard_gradient(s.X, s.y, at);
    const Matrix h = hazard_hessian(s.X, s.y, at);
    const double eps = 1e-5;
    for (Eigen::Index j = 0; j < 3; ++j) {
        Vector up = at, down = at;
        up(j) += eps;
        down(j) -= eps;
        const double fd = (hazard_log_likelihood(s.X, s.y, up) - hazard_log_likelihood(s.X, s.y, down)) / (2 * eps);
        CHECK(fd == doctest::Approx(g(j)).epsilon(1e-6));
        const Vector fdh = (hazard_gradient(s.X, s.y, up) - hazard_gradient(s.X, s.y, down)) / (2 * eps);
        for (Eigen::Index k = 0; k < 3; ++k) {
            CHECK(fdh(k) == doctest::Approx(h(k, j)).epsilon(1e-6));
        }
    }
    const auto j = to_json(model);
    CHECK(j.dump().find("\"B\"") != std::string::npos);
}

TEST_CASE("hazard fit errors and prediction threshold")
{
    Matrix X(4, 1);
    X << -2, -1, 1, 2;
    Labels sep(4);
    sep << 0, 0, 1, 1;
    CHECK_ERRC(hazard_fit(X, sep), Errc::Separation);
    Labels one(4);
    one << 1, 1, 1, 1;
    CHECK_ERRC(hazard_fit(X, one), Errc::InvalidArgument);

    HazardModel m;
    m.beta = (Vector(2) << 0.0, 1.0).finished();
    CHECK(hazard_predict(m, (Vector(1) << 0.0).finished()) == 0);
    CHECK(hazard_predict(m, (Vector(1) << 0.01).finished()) == 1);
    CHECK_ERRC(hazard_predict(m, Vector::Zero(2)), Errc::DimensionMismatch);
}

TEST_CASE("knn majority vote with index tie-breaking")
{
    Matrix X(5, 1);
    X << 0, 1, -1, 2, -2;
    Labels y(5);
    y << 1, 0, 1, 0, 0;
    const auto m3 = knn_fit(X, y, 3);
    CHECK(knn_predict(m3, (Vector(1) << 0.0).finished()) == 1);
    CHECK(knn_predict(m3, (Vector(1) << 1.6).finished()) == 0);
    const auto m1 = knn_fit(X, y, 1);
    CHECK(knn_predict(m1, (Vector(1) << 0.5).finished()) == 1);
    CHECK(knn_predict(m1, (Vector(1) << -0.5).finished()) == 1);
    CHECK_ERRC(knn_fit(X, y, 4), Errc::InvalidArgument);
    CHECK_ERRC(knn_fit(X, y, 7), Errc::InvalidArgument);
    CHECK_ERRC(knn_predict(m3, Vector::Zero(2)), Errc::DimensionMismatch);
}

TEST_CASE("svm on a symmetric separable set puts the boundary at x1 = 0")
{
    Matrix X(8, 2);
    X << 1, 1, 1, -1, 2, 0.5, 2, -0.5, -1, 1, -1, -1, -2, 0.5, -2, -0.5;
    Labels y(8);
    y << 1, 1, 1, 1, 0, 0, 0, 0;
    SvmOptions opts;
    opts.C = 10.0;
    const auto m = svm_fit(X, y, opts);
    CHECK(std::abs(m.b) < 1e-3);
    CHECK(std::abs(m.w(1)) < 1e-3);
    CHECK(m.w(0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(m.gap <= 1e-6 * (1 + std::abs(m.primal)));
    CHECK(svm_predict(m, (Vector(2) << 0.5, 3.0).finished()) == 1);
    CHECK(svm_predict(m, (Vector(2) << 0.0, 0.0).finished()) == 0);
    CHECK(svm_primal_objective(X, (y.cast<double>().array() * 2 - 1).matrix(), m.w, m.b, opts.C) ==
          doctest::Approx(m.primal));
    opts.C = 0.0;
    CHECK_ERRC(svm_fit(X, y, opts), Errc::InvalidArgument);
}

TEST_CASE("svm primal is not improved by perturbing the solution")
{
    const Vector beta = (Vector(4) << 0.0, 1.0, -1.0, 0.5).finished();
    const auto s = logistic_sample(60, beta, 4);
    const Vector ys = (s.y.cast<double>().array() * 2 - 1).matrix();
    for (double C : {1e-3, 0.1, 1.0}) {
        SvmOptions opts;
        opts.C = C;
        const auto m = svm_fit(s.X, s.y, opts);
        const double best = svm_primal_objective(s.X, ys, m.w, m.b, C);
        std::mt19937_64 rng(9);
        std::normal_distribution<double> normal(0.0, 1e-3);
        for (int t = 0; t < 50; ++t) {
            Vector w = m.w;
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                w(j) += normal(rng);
            }
            const double b = svm_optimal_bias(s.X, ys, w);
            CHECK(svm_primal_objective(s.X, ys, w, b, C) >= best - 1e-6 * (1 + best));
        }
    }
}
