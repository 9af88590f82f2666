#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "contextox/rng.hpp"

namespace contextox::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// A named trainable tensor. Gradients accumulate across Graph::backward
/// calls until zero_grad.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    Parameter(std::string n, int rows, int cols)
        : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

    void zero_grad() { grad.setZero(); }
    long size() const { return value.size(); }
};

/// Owning collection of parameters; creation order is the serialization
/// order.
class ParameterSet {
public:
    Parameter& create(const std::string& name, int rows, int cols);
    Parameter& create_normal(const std::string& name, int rows, int cols, Rng& rng, double stddev);
    Parameter& create_constant(const std::string& name, int rows, int cols, double value);

    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    void zero_grads();
    std::size_t size() const { return params_.size(); }
    long coord_count() const;

    /// Deep copy of all values (same names/shapes), for best-epoch snapshots.
    std::vector<Matrix> snapshot_values() const;
    void restore_values(const std::vector<Matrix>& values);

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Handle to a node on a Graph tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode autodiff over dense matrices. A Graph is a single-use tape:
/// build the forward computation, read values, optionally call backward once
/// to accumulate gradients into bound Parameters.
class Graph {
public:
    Graph() { nodes_.reserve(256); }

    Var input(Matrix value);
    Var zeros(int rows, int cols) { return input(Matrix::Zero(rows, cols)); }
    Var param(Parameter& p);

    const Matrix& value(Var v) const { return nodes_[check(v)].value; }

    // Arithmetic.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var cmul(Var a, Var b); // elementwise
    Var matmul(Var a, Var b);
    Var scale(Var a, double s);
    Var affine(Var a, double mul, double shift); // mul*a + shift elementwise
    Var add_rowwise(Var a, Var row);             // broadcast a 1xN row over rows
    Var cmul_const(Var a, Matrix weights);       // elementwise by a constant

    // Nonlinearities.
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var log(Var a);
    Var clamp(Var a, double lo, double hi);

    // Row-structured ops.
    Var softmax_rows(Var a);
    Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(Var a, Var b);
    Var slice_rows(Var a, int first, int count);
    Var transpose(Var a);
    Var gather_rows(Var table, std::vector<int> indices);

    // Reductions.
    Var sum_all(Var a);  // 1x1
    Var mean_all(Var a); // 1x1

    /// Sum over rows of -log softmax(logits)[target]; numerically stable.
    Var cross_entropy_rows(Var logits, std::vector<int> targets);

    /// Accumulates d(loss)/d(param) into every bound Parameter's grad.
    /// loss must be 1x1. May be called once per graph.
    void backward(Var loss);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Graph&)> back;
    };

    std::vector<Node> nodes_;
    std::vector<std::pair<int, Parameter*>> bindings_;
    std::unordered_map<const Parameter*, int> bound_;
    bool backward_done_ = false;

    int check(Var v) const;
    Var push(Matrix value, std::function<void(Graph&)> back);
    Matrix& grad(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
    const Matrix& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
};

} // namespace contextox::nn
