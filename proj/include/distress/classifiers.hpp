#pragma once

#include "distress/features.hpp"

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace distress {

using Matrix = Eigen::MatrixXd;  // one observation per row
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;  // 0 = non-bankrupt, 1 = bankrupt

// Design matrix and label vector of a dataset.
Matrix design_matrix(const Dataset& data);
Labels label_vector(const Dataset& data);

// ---------------------------------------------------------------------------------------------
// Discrete-time hazard model: logistic regression fitted by maximum likelihood.

struct HazardOptions {
    double gradient_tolerance = 1e-8;  // infinity norm of the score vector
    int max_iterations = 100;
    double separation_norm = 1e6;
};

struct HazardModel {
    std::vector<std::string> feature_names;
    Vector beta;  // intercept first, then one coefficient per feature
    double log_lik_fit = 0.0;
    double log_lik_null = 0.0;
    std::size_t n = 0;
    int iterations = 0;
    double gradient_norm = 0.0;
};

// Log-likelihood, score and Hessian at `beta` (intercept first; X carries no constant column).
double hazard_log_likelihood(const Matrix& X, const Labels& y, const Vector& beta);
Vector hazard_gradient(const Matrix& X, const Labels& y, const Vector& beta);
Matrix hazard_hessian(const Matrix& X, const Labels& y, const Vector& beta);

// Newton-Raphson with step halving. Throws InvalidArgument (one class only), Separation, NoConvergence.
HazardModel hazard_fit(const Matrix& X, const Labels& y, const HazardOptions& options = {},
                       std::vector<std::string> feature_names = {});

// Event probability logistic(beta . [1, x]).
double hazard_probability(const HazardModel& model, const Vector& x);

// 1 iff the event probability strictly exceeds the threshold. Throws DimensionMismatch.
int hazard_predict(const HazardModel& model, const Vector& x, double threshold = 0.5);

// ---------------------------------------------------------------------------------------------
// k-nearest neighbours with Euclidean distance and majority vote.

struct KnnModel {
    Matrix X;
    Labels y;
    int k = 5;
};

// Throws InvalidArgument unless k is odd, positive and at most the training size.
KnnModel knn_fit(Matrix X, Labels y, int k = 5);

// Distance ties resolve toward the lower training index. Throws DimensionMismatch.
int knn_predict(const KnnModel& model, const Vector& x);

// ---------------------------------------------------------------------------------------------
// Linear soft-margin SVM with an unregularized bias, solved in the dual by SMO.

struct SvmOptions {
    double C = 1e-5;
    double gap_tolerance = 1e-6;  // relative to 1 + |primal|
    int max_epochs = 10000;       // SMO updates allowed = max_epochs * n
    double initial_kkt_tolerance = 1e-3;
};

struct SvmModel {
    Vector w;
    double b = 0.0;
    double C = 0.0;
    std::vector<double> alpha;
    std::vector<double> slack;  // xi_i = max(0, 1 - y_i (w.x_i + b))
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    long iterations = 0;
    double kkt_tolerance = 0.0;
};

// Hinge-minimizing bias for fixed w (exact over breakpoints); y in {-1, +1}.
double svm_optimal_bias(const Matrix& X, const Vector& y_signed, const Vector& w);

// 0.5 |w|^2 + C sum max(0, 1 - y (w.x + b)); y in {-1, +1}.
double svm_primal_objective(const Matrix& X, const Vector& y_signed, const Vector& w, double b, double C);

// Labels 0/1 map to -1/+1. Throws InvalidArgument (one class only or C <= 0) and NoConvergence.
SvmModel svm_fit(const Matrix& X, const Labels& y, const SvmOptions& options = {});

double svm_decision(const SvmModel& model, const Vector& x);

// 1 iff w.x + b > 0; points on the hyperplane are non-bankrupt. Throws DimensionMismatch.
int svm_predict(const SvmModel& model, const Vector& x);

// JSON with named coefficients and solver metadata.
nlohmann::json to_json(const HazardModel& model);
nlohmann::json to_json(const SvmModel& model, const std::vector<std::string>& feature_names);
nlohmann::json to_json(const KnnModel& model);

}  // namespace distress
