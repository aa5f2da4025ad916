#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prafilter {

// Row-major CSR design matrix. Works for both the dense random-walk
// feature matrices (few columns) and the sparse extractor features.
struct DesignMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<size_t> indptr{0};
    std::vector<uint32_t> indices;
    std::vector<double> data;

    void add_row(const std::vector<std::pair<uint32_t, double>>& entries);
    static DesignMatrix from_dense(const std::vector<std::vector<double>>& values);
};

struct LogRegOptions {
    double l2 = 0.1;
    int max_iters = 500;
    double tolerance = 1e-6;
};

struct LogRegResult {
    std::vector<double> weights;
    double bias = 0.0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
};

// L2-regularized negative log-likelihood; the bias is not regularized.
double logreg_objective(const DesignMatrix& x, const std::vector<uint8_t>& y,
                        const std::vector<double>& weights, double bias, double l2);

// Analytic gradient of the objective; grad_bias returned separately.
void logreg_gradient(const DesignMatrix& x, const std::vector<uint8_t>& y,
                     const std::vector<double>& weights, double bias, double l2,
                     std::vector<double>* grad_weights, double* grad_bias);

// Deterministic full-batch gradient descent with backtracking line
// search, started from zero. Converged when the gradient max-norm
// (weights and bias) drops below the tolerance. Throws if only one class
// is present or any feature value is non-finite.
LogRegResult fit_logistic(const DesignMatrix& x, const std::vector<uint8_t>& y,
                          const LogRegOptions& options);

}  // namespace prafilter
