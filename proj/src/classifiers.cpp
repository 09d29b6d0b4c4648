#include "distress/classifiers.hpp"

#include "distress/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace distress {

namespace {

double logistic(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void require_rows(const Matrix& X, const Labels& y)
{
    if (X.rows() != y.size()) {
        throw Error(Errc::DimensionMismatch, fmt::format("{} rows but {} labels", X.rows(), y.size()));
    }
}

void require_both_classes(const Labels& y)
{
    const auto positives = (y.array() == 1).count();
    if (positives == 0 || positives == y.size()) {
        throw Error(Errc::InvalidArgument, "both classes must be present");
    }
    if ((y.array() != 0 && y.array() != 1).any()) {
        throw Error(Errc::InvalidArgument, "labels must be 0 or 1");
    }
}

Vector linear_predictor(const Matrix& X, const Vector& beta)
{
    return (X * beta.tail(beta.size() - 1)).array() + beta(0);
}

}  // namespace

Matrix design_matrix(const Dataset& data)
{
    Matrix X(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.dimension()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t f = 0; f < data.dimension(); ++f) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = data.rows[i].features.at(f);
        }
    }
    return X;
}

Labels label_vector(const Dataset& data)
{
    Labels y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = data.rows[i].brupt;
    }
    return y;
}

double hazard_log_likelihood(const Matrix& X, const Labels& y, const Vector& beta)
{
    require_rows(X, y);
    const Vector eta = linear_predictor(X, beta);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // y*eta - log(1 + e^eta)
        ll += (y(i) == 1 ? eta(i) : 0.0) - softplus(eta(i));
    }
    return ll;
}

Vector hazard_gradient(const Matrix& X, const Labels& y, const Vector& beta)
{
    require_rows(X, y);
    const Vector eta = linear_predictor(X, beta);
    Vector residual(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        residual(i) = static_cast<double>(y(i)) - logistic(eta(i));
    }
    Vector g(beta.size());
    g(0) = residual.sum();
    g.tail(beta.size() - 1) = X.transpose() * residual;
    return g;
}

Matrix hazard_hessian(const Matrix& X, const Labels& y, const Vector& beta)
{
    require_rows(X, y);
    const Vector eta = linear_predictor(X, beta);
    const auto n = X.rows();
    const auto d = X.cols();
    Matrix Xa(n, d + 1);
    Xa.col(0).setOnes();
    Xa.rightCols(d) = X;
    Vector weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = logistic(eta(i));
        weight(i) = p * (1.0 - p);
    }
    return -(Xa.transpose() * weight.asDiagonal() * Xa);
}

HazardModel hazard_fit(const Matrix& X, const Labels& y, const HazardOptions& options,
                       std::vector<std::string> feature_names)
{
    require_rows(X, y);
    require_both_classes(y);
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
        throw Error(Errc::DimensionMismatch, "feature name count does not match the design matrix");
    }

    HazardModel model;
    model.feature_names = std::move(feature_names);
    model.n = static_cast<std::size_t>(X.rows());

    const double events = static_cast<double>((y.array() == 1).count());
    const double n = static_cast<double>(X.rows());
    const double rate = events / n;
    model.log_lik_null = events * std::log(rate) + (n - events) * std::log1p(-rate);

    // Start from the intercept-only optimum.
    Vector beta = Vector::Zero(X.cols() + 1);
    beta(0) = std::log(rate / (1.0 - rate));
    double ll = hazard_log_likelihood(X, y, beta);

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const Vector g = hazard_gradient(X, y, beta);
        model.gradient_norm = g.lpNorm<Eigen::Infinity>();
        if (model.gradient_norm < options.gradient_tolerance) {
            break;
        }
        const Matrix info = -hazard_hessian(X, y, beta);
        const Eigen::LLT<Matrix> llt(info);
        if (llt.info() != Eigen::Success) {
            throw Error(Errc::Separation, "information matrix is singular; the classes are separable or the features collinear");
        }
        const Vector step = llt.solve(g);
        double scale = 1.0;
        Vector candidate = beta + step;
        double ll_candidate = hazard_log_likelihood(X, y, candidate);
        while (ll_candidate < ll - 1e-12 * std::abs(ll) && scale > 1e-10) {
            scale *= 0.5;
            candidate = beta + scale * step;
            ll_candidate = hazard_log_likelihood(X, y, candidate);
        }
        beta = std::move(candidate);
        ll = ll_candidate;
        model.iterations = iter;
        if (!beta.allFinite() || beta.norm() > options.separation_norm) {
            throw Error(Errc::Separation, fmt::format("coefficient norm diverged past {}", options.separation_norm));
        }
        if (iter == options.max_iterations) {
            model.gradient_norm = hazard_gradient(X, y, beta).lpNorm<Eigen::Infinity>();
            if (model.gradient_norm >= options.gradient_tolerance) {
                throw Error(Errc::NoConvergence,
                            fmt::format("gradient norm {} after {} iterations", model.gradient_norm, iter));
            }
        }
    }

    // Every observation fitted with certainty: the likelihood has no finite maximizer.
    const Vector eta = linear_predictor(X, beta);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(y(i)) - logistic(eta(i))));
    }
    if (worst < 1e-6) {
        throw Error(Errc::Separation, "every observation is fitted with certainty; the classes are separable");
    }

    model.beta = std::move(beta);
    model.log_lik_fit = std::max(ll, model.log_lik_null);
    return model;
}

double hazard_probability(const HazardModel& model, const Vector& x)
{
    if (x.size() + 1 != model.beta.size()) {
        throw Error(Errc::DimensionMismatch,
                    fmt::format("model expects {} features, got {}", model.beta.size() - 1, x.size()));
    }
    return logistic(model.beta(0) + model.beta.tail(x.size()).dot(x));
}

int hazard_predict(const HazardModel& model, const Vector& x, double threshold)
{
    return hazard_probability(model, x) > threshold ? 1 : 0;
}

KnnModel knn_fit(Matrix X, Labels y, int k)
{
    require_rows(X, y);
    if (k <= 0 || k % 2 == 0) {
        throw Error(Errc::InvalidArgument, fmt::format("k must be odd and positive, got {}", k));
    }
    if (k > X.rows()) {
        throw Error(Errc::InvalidArgument, fmt::format("k = {} exceeds the training size {}", k, X.rows()));
    }
    return KnnModel{std::move(X), std::move(y), k};
}

int knn_predict(const KnnModel& model, const Vector& x)
{
    if (x.size() != model.X.cols()) {
        throw Error(Errc::DimensionMismatch, fmt::format("model expects {} features, got {}", model.X.cols(), x.size()));
    }
    const Vector dist2 = (model.X.rowwise() - x.transpose()).rowwise().squaredNorm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dist2.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto k = static_cast<std::size_t>(model.k);
    auto closer = [&](Eigen::Index a, Eigen::Index b) {
        return dist2(a) < dist2(b) || (dist2(a) == dist2(b) && a < b);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), closer);
    int bankrupt = 0;
    for (std::size_t i = 0; i < k; ++i) {
        bankrupt += model.y(order[i]) == 1 ? 1 : 0;
    }
    return 2 * bankrupt > model.k ? 1 : 0;
}

double svm_optimal_bias(const Matrix& X, const Vector& y_signed, const Vector& w)
{
    const Vector f = X * w;
    // Positive points contribute max(0, bp - b) with bp = 1 - f; negative ones max(0, b - bp), bp = -1 - f.
    std::vector<double> pos;
    std::vector<double> neg;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (y_signed(i) > 0) {
            pos.push_back(1.0 - f(i));
        } else {
            neg.push_back(-1.0 - f(i));
        }
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::vector<double> pos_suffix(pos.size() + 1, 0.0);
    for (std::size_t i = pos.size(); i-- > 0;) {
        pos_suffix[i] = pos_suffix[i + 1] + pos[i];
    }
    std::vector<double> neg_prefix(neg.size() + 1, 0.0);
    for (std::size_t i = 0; i < neg.size(); ++i) {
        neg_prefix[i + 1] = neg_prefix[i] + neg[i];
    }
    auto hinge = [&](double b) {
        const auto p = static_cast<std::size_t>(std::upper_bound(pos.begin(), pos.end(), b) - pos.begin());
        const auto q = static_cast<std::size_t>(std::lower_bound(neg.begin(), neg.end(), b) - neg.begin());
        return (pos_suffix[p] - static_cast<double>(pos.size() - p) * b) +
               (static_cast<double>(q) * b - neg_prefix[q]);
    };
    double best_b = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto* points : {&pos, &neg}) {
        for (double b : *points) {
            const double h = hinge(b);
            if (h < best) {
                best = h;
                best_b = b;
            }
        }
    }
    return best_b;
}

double svm_primal_objective(const Matrix& X, const Vector& y_signed, const Vector& w, double b, double C)
{
    const Vector margins = y_signed.array() * ((X * w).array() + b);
    return 0.5 * w.squaredNorm() + C * (1.0 - margins.array()).max(0.0).sum();
}

SvmModel svm_fit(const Matrix& X, const Labels& labels, const SvmOptions& options)
{
    require_rows(X, labels);
    require_both_classes(labels);
    if (!(options.C > 0.0)) {
        throw Error(Errc::InvalidArgument, fmt::format("C must be positive, got {}", options.C));
    }
    const auto n = X.rows();
    const double C = options.C;
    constexpr double tau = 1e-12;

    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = labels(i) == 1 ? 1.0 : -1.0;
    }
    const Vector qd = X.rowwise().squaredNorm();
    Vector alpha = Vector::Zero(n);
    Vector G = Vector::Constant(n, -1.0);  // gradient of 0.5 a'Qa - e'a
    Vector w = Vector::Zero(X.cols());

    auto upper = [&](Eigen::Index t) { return alpha(t) >= C; };
    auto lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

    SvmModel model;
    model.C = C;
    double eps = options.initial_kkt_tolerance;
    const long max_updates = static_cast<long>(options.max_epochs) * static_cast<long>(n);
    long updates = 0;

    for (;;) {
        // Second-order working-set selection with the equality constraint y'a = 0.
        for (;;) {
            double gmax = -std::numeric_limits<double>::infinity();
            Eigen::Index i = -1;
            for (Eigen::Index t = 0; t < n; ++t) {
                if (y(t) > 0) {
                    if (!upper(t) && -G(t) >= gmax) {
                        gmax = -G(t);
                        i = t;
                    }
                } else if (!lower(t) && G(t) >= gmax) {
                    gmax = G(t);
                    i = t;
                }
            }
            if (i < 0) {
                break;
            }
            const Vector ki = X * X.row(i).transpose();
            double gmax2 = -std::numeric_limits<double>::infinity();
            double best_obj = std::numeric_limits<double>::infinity();
            Eigen::Index j = -1;
            for (Eigen::Index t = 0; t < n; ++t) {
                double grad_diff = 0.0;
                if (y(t) > 0) {
                    if (lower(t)) {
                        continue;
                    }
                    grad_diff = gmax + G(t);
                    gmax2 = std::max(gmax2, G(t));
                } else {
                    if (upper(t)) {
                        continue;
                    }
                    grad_diff = gmax - G(t);
                    gmax2 = std::max(gmax2, -G(t));
                }
                if (grad_diff > 0.0) {
                    double quad = qd(i) + qd(t) - 2.0 * ki(t);
                    if (quad <= 0.0) {
                        quad = tau;
                    }
                    const double obj = -(grad_diff * grad_diff) / quad;
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
            if (gmax + gmax2 < eps || j < 0) {
                break;
            }
            if (++updates > max_updates) {
                throw Error(Errc::NoConvergence, fmt::format("SMO exceeded {} epochs", options.max_epochs));
            }

            const double ai_old = alpha(i);
            const double aj_old = alpha(j);
            const double qij = y(i) * y(j) * ki(j);
            if (y(i) != y(j)) {
                double quad = qd(i) + qd(j) + 2.0 * qij;
                if (quad <= 0.0) {
                    quad = tau;
                }
                const double delta = (-G(i) - G(j)) / quad;
                const double diff = alpha(i) - alpha(j);
                alpha(i) += delta;
                alpha(j) += delta;
                if (diff > 0.0) {
                    if (alpha(j) < 0.0) {
                        alpha(j) = 0.0;
                        alpha(i) = diff;
                    }
                } else if (alpha(i) < 0.0) {
                    alpha(i) = 0.0;
                    alpha(j) = -diff;
                }
                if (diff > 0.0) {
                    if (alpha(i) > C) {
                        alpha(i) = C;
                        alpha(j) = C - diff;
                    }
                } else if (alpha(j) > C) {
                    alpha(j) = C;
                    alpha(i) = C + diff;
                }
            } else {
                double quad = qd(i) + qd(j) - 2.0 * qij;
                if (quad <= 0.0) {
                    quad = tau;
                }
                const double delta = (G(i) - G(j)) / quad;
                const double sum = alpha(i) + alpha(j);
                alpha(i) -= delta;
                alpha(j) += delta;
                if (sum > C) {
                    if (alpha(i) > C) {
                        alpha(i) = C;
                        alpha(j) = sum - C;
                    }
                } else if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = sum;
                }
                if (sum > C) {
                    if (alpha(j) > C) {
                        alpha(j) = C;
                        alpha(i) = sum - C;
                    }
                } else if (alpha(i) < 0.0) {
                    alpha(i) = 0.0;
                    alpha(j) = sum;
                }
            }
            const Vector dw = (alpha(i) - ai_old) * y(i) * X.row(i).transpose() +
                              (alpha(j) - aj_old) * y(j) * X.row(j).transpose();
            w += dw;
            G.array() += y.array() * (X * dw).array();
        }

        const double b_opt = svm_optimal_bias(X, y, w);
        model.primal = svm_primal_objective(X, y, w, b_opt, C);
        model.dual = alpha.sum() - 0.5 * w.squaredNorm();
        model.gap = model.primal - model.dual;
        model.kkt_tolerance = eps;
        if (model.gap <= options.gap_tolerance * (1.0 + std::abs(model.primal))) {
            break;
        }
        if (eps < 1e-14) {
            throw Error(Errc::NoConvergence, fmt::format("duality gap {} above tolerance", model.gap));
        }
        eps *= 0.1;
        // Refresh the gradient to shed accumulated rounding before tightening.
        G = (y.array() * (X * w).array()).matrix() - Vector::Ones(n);
    }

    // Bias from the KKT conditions: mean over free vectors, else midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    long n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y(t) * G(t);
        if (upper(t)) {
            if (y(t) < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (lower(t)) {
            if (y(t) > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);

    model.w = std::move(w);
    model.b = -rho;
    model.iterations = updates;
    model.alpha.assign(alpha.data(), alpha.data() + n);
    const Vector margins = y.array() * ((X * model.w).array() + model.b);
    model.slack.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        model.slack[static_cast<std::size_t>(t)] = std::max(0.0, 1.0 - margins(t));
    }
    return model;
}

double svm_decision(const SvmModel& model, const Vector& x)
{
    if (x.size() != model.w.size()) {
        throw Error(Errc::DimensionMismatch, fmt::format("model expects {} features, got {}", model.w.size(), x.size()));
    }
    return model.w.dot(x) + model.b;
}

int svm_predict(const SvmModel& model, const Vector& x)
{
    return svm_decision(model, x) > 0.0 ? 1 : 0;
}

nlohmann::json to_json(const HazardModel& model)
{
    nlohmann::json coefficients = nlohmann::json::object();
    coefficients["intercept"] = model.beta(0);
    for (Eigen::Index f = 1; f < model.beta.size(); ++f) {
        const auto idx = static_cast<std::size_t>(f - 1);
        const auto name = idx < model.feature_names.size() ? model.feature_names[idx] : fmt::format("x{}", idx);
        coefficients[name] = model.beta(f);
    }
    return {{"kind", "hazard"},
            {"coefficients", std::move(coefficients)},
            {"log_lik_fit", model.log_lik_fit},
            {"log_lik_null", model.log_lik_null},
            {"n", model.n},
            {"solver", {{"method", "newton"}, {"iterations", model.iterations}, {"gradient_norm", model.gradient_norm}}}};
}

nlohmann::json to_json(const SvmModel& model, const std::vector<std::string>& feature_names)
{
    nlohmann::json weights = nlohmann::json::object();
    for (Eigen::Index f = 0; f < model.w.size(); ++f) {
        const auto idx = static_cast<std::size_t>(f);
        const auto name = idx < feature_names.size() ? feature_names[idx] : fmt::format("x{}", idx);
        weights[name] = model.w(f);
    }
    return {{"kind", "linear_svm"},
            {"weights", std::move(weights)},
            {"bias", model.b},
            {"C", model.C},
            {"solver",
             {{"method", "smo"},
              {"iterations", model.iterations},
              {"primal", model.primal},
              {"dual", model.dual},
              {"gap", model.gap},
              {"kkt_tolerance", model.kkt_tolerance}}}};
}

nlohmann::json to_json(const KnnModel& model)
{
    return {{"kind", "knn"}, {"k", model.k}, {"n_train", model.X.rows()}, {"dimension", model.X.cols()}};
}

}  // namespace distress
