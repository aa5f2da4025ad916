#include "prafilter/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prafilter {

void DesignMatrix::add_row(const std::vector<std::pair<uint32_t, double>>& entries) {
    for (const auto& [j, v] : entries) {
        indices.push_back(j);
        data.push_back(v);
        cols = std::max(cols, size_t(j) + 1);
    }
    indptr.push_back(indices.size());
    ++rows;
}

DesignMatrix DesignMatrix::from_dense(const std::vector<std::vector<double>>& values) {
    DesignMatrix m;
    for (const auto& row : values) {
        std::vector<std::pair<uint32_t, double>> entries;
        for (size_t j = 0; j < row.size(); ++j)
            if (row[j] != 0.0) entries.emplace_back(static_cast<uint32_t>(j), row[j]);
        m.add_row(entries);
        m.cols = std::max(m.cols, row.size());
    }
    return m;
}

namespace {

// log(1 + e^z) without overflow.
inline double log1pexp(double z) {
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> margins(const DesignMatrix& x, const std::vector<double>& w, double b) {
    std::vector<double> z(x.rows, b);
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = x.indptr[i]; k < x.indptr[i + 1]; ++k)
            z[i] += w[x.indices[k]] * x.data[k];
    return z;
}

}  // namespace

double logreg_objective(const DesignMatrix& x, const std::vector<uint8_t>& y,
                        const std::vector<double>& weights, double bias, double l2) {
    auto z = margins(x, weights, bias);
    double nll = 0.0;
    for (size_t i = 0; i < x.rows; ++i) {
        // -log p(y_i): log(1+e^z) - y*z
        nll += log1pexp(z[i]) - (y[i] ? z[i] : 0.0);
    }
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return nll + 0.5 * l2 * reg;
}

void logreg_gradient(const DesignMatrix& x, const std::vector<uint8_t>& y,
                     const std::vector<double>& weights, double bias, double l2,
                     std::vector<double>* grad_weights, double* grad_bias) {
    auto z = margins(x, weights, bias);
    grad_weights->assign(weights.size(), 0.0);
    double gb = 0.0;
    for (size_t i = 0; i < x.rows; ++i) {
        double r = sigmoid(z[i]) - (y[i] ? 1.0 : 0.0);
        gb += r;
        for (size_t k = x.indptr[i]; k < x.indptr[i + 1]; ++k)
            (*grad_weights)[x.indices[k]] += r * x.data[k];
    }
    for (size_t j = 0; j < weights.size(); ++j) (*grad_weights)[j] += l2 * weights[j];
    *grad_bias = gb;
}

LogRegResult fit_logistic(const DesignMatrix& x, const std::vector<uint8_t>& y,
                          const LogRegOptions& options) {
    if (x.rows != y.size()) throw std::invalid_argument("fit_logistic: row/label count mismatch");
    if (x.rows < 2) throw std::invalid_argument("fit_logistic: need at least 2 rows");
    bool has_pos = false, has_neg = false;
    for (uint8_t v : y) (v ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw std::invalid_argument("fit_logistic: both classes must be present");
    for (double v : x.data)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_logistic: non-finite feature value");

    std::vector<double> w(x.cols, 0.0);
    double b = 0.0;
    double obj = logreg_objective(x, y, w, b, options.l2);
    std::vector<double> gw;
    double gb = 0.0;
    double step = 1.0;
    const double armijo = 1e-4;

    LogRegResult result;
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
        logreg_gradient(x, y, w, b, options.l2, &gw, &gb);
        double max_norm = std::abs(gb);
        double sq_norm = gb * gb;
        for (double gv : gw) {
            max_norm = std::max(max_norm, std::abs(gv));
            sq_norm += gv * gv;
        }
        if (max_norm < options.tolerance) {
            result.converged = true;
            break;
        }

        // Backtracking line search along the negative gradient.
        step *= 2.0;  // allow the step to grow back after cautious rounds
        std::vector<double> w_try(w.size());
        double b_try, obj_try;
        for (;;) {
            for (size_t j = 0; j < w.size(); ++j) w_try[j] = w[j] - step * gw[j];
            b_try = b - step * gb;
            obj_try = logreg_objective(x, y, w_try, b_try, options.l2);
            if (obj_try <= obj - armijo * step * sq_norm) break;
            step *= 0.5;
            if (step < 1e-18) {  // no descent possible at float resolution
                result.converged = true;
                break;
            }
        }
        if (result.converged) break;
        // Stop once the accepted step no longer moves the objective at
        // double resolution; further iterations cannot make progress.
        bool stalled = obj - obj_try <= 4e-16 * std::max(1.0, std::abs(obj));
        w.swap(w_try);
        b = b_try;
        obj = obj_try;
        if (stalled) {
            ++iter;
            break;
        }
    }

    result.weights = std::move(w);
    result.bias = b;
    result.iterations = iter;
    result.objective = logreg_objective(x, y, result.weights, result.bias, options.l2);
    return result;
}

}  // namespace prafilter
