#include "contextox/nn/graph.hpp"

#include <cmath>

#include "contextox/errors.hpp"

namespace contextox::nn {

// ---------------------------------------------------------------------------
// ParameterSet.
// ---------------------------------------------------------------------------

Parameter& ParameterSet::create(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw IntegrityError("duplicate parameter name: " + name);
    index_.emplace(name, params_.size());
    params_.push_back(std::make_unique<Parameter>(name, rows, cols));
    return *params_.back();
}

Parameter& ParameterSet::create_normal(const std::string& name, int rows, int cols, Rng& rng,
                                       double stddev) {
    Parameter& p = create(name, rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) p.value(r, c) = rng.normal(0.0, stddev);
    }
    return p;
}

Parameter& ParameterSet::create_constant(const std::string& name, int rows, int cols,
                                         double value) {
    Parameter& p = create(name, rows, cols);
    p.value.setConstant(value);
    return p;
}

Parameter* ParameterSet::find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParameterSet::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
}

std::vector<Parameter*> ParameterSet::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

void ParameterSet::zero_grads() {
    for (auto& p : params_) p->zero_grad();
}

long ParameterSet::coord_count() const {
    long n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
}

std::vector<Matrix> ParameterSet::snapshot_values() const {
    std::vector<Matrix> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
}

void ParameterSet::restore_values(const std::vector<Matrix>& values) {
    if (values.size() != params_.size()) {
        throw IntegrityError("parameter snapshot size mismatch");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (values[i].rows() != params_[i]->value.rows() ||
            values[i].cols() != params_[i]->value.cols()) {
            throw IntegrityError("parameter snapshot shape mismatch for " + params_[i]->name);
        }
        params_[i]->value = values[i];
    }
}

// ---------------------------------------------------------------------------
// Graph.
// ---------------------------------------------------------------------------

int Graph::check(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw IntegrityError("invalid graph variable");
    }
    return v.id;
}

Var Graph::push(Matrix value, std::function<void(Graph&)> back) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(back)});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Graph::input(Matrix value) { return push(std::move(value), nullptr); }

Var Graph::param(Parameter& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return Var{it->second};
    Var v = push(p.value, nullptr);
    bound_.emplace(&p, v.id);
    bindings_.emplace_back(v.id, &p);
    return v;
}

Var Graph::add(Var a, Var b) {
    const int ia = check(a), ib = check(b);
    return push(val(ia) + val(ib), [ia, ib, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out);
        g.grad(ib) += g.grad(out);
    });
}

Var Graph::sub(Var a, Var b) {
    const int ia = check(a), ib = check(b);
    return push(val(ia) - val(ib), [ia, ib, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out);
        g.grad(ib) -= g.grad(out);
    });
}

Var Graph::cmul(Var a, Var b) {
    const int ia = check(a), ib = check(b);
    return push(val(ia).cwiseProduct(val(ib)),
                [ia, ib, out = static_cast<int>(nodes_.size())](Graph& g) {
                    g.grad(ia) += g.grad(out).cwiseProduct(g.val(ib));
                    g.grad(ib) += g.grad(out).cwiseProduct(g.val(ia));
                });
}

Var Graph::matmul(Var a, Var b) {
    const int ia = check(a), ib = check(b);
    if (val(ia).cols() != val(ib).rows()) {
        throw IntegrityError("matmul shape mismatch: " + std::to_string(val(ia).cols()) + " vs " +
                             std::to_string(val(ib).rows()));
    }
    return push(val(ia) * val(ib), [ia, ib, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out) * g.val(ib).transpose();
        g.grad(ib) += g.val(ia).transpose() * g.grad(out);
    });
}

Var Graph::scale(Var a, double s) {
    const int ia = check(a);
    return push(val(ia) * s, [ia, s, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out) * s;
    });
}

Var Graph::affine(Var a, double mul, double shift) {
    const int ia = check(a);
    Matrix v = val(ia) * mul;
    v.array() += shift;
    return push(std::move(v), [ia, mul, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out) * mul;
    });
}

Var Graph::add_rowwise(Var a, Var row) {
    const int ia = check(a), ir = check(row);
    if (val(ir).rows() != 1 || val(ir).cols() != val(ia).cols()) {
        throw IntegrityError("add_rowwise requires a 1xN row matching a's columns");
    }
    Matrix v = val(ia);
    v.rowwise() += val(ir).row(0);
    return push(std::move(v), [ia, ir, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out);
        g.grad(ir).row(0) += g.grad(out).colwise().sum();
    });
}

Var Graph::cmul_const(Var a, Matrix weights) {
    const int ia = check(a);
    Matrix v = val(ia).cwiseProduct(weights);
    return push(std::move(v),
                [ia, w = std::move(weights), out = static_cast<int>(nodes_.size())](Graph& g) {
                    g.grad(ia) += g.grad(out).cwiseProduct(w);
                });
}

Var Graph::sigmoid(Var a) {
    const int ia = check(a);
    Matrix v = val(ia).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& y = g.val(out);
        g.grad(ia) += g.grad(out).cwiseProduct(y.cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y));
    });
}

Var Graph::tanh(Var a) {
    const int ia = check(a);
    Matrix v = val(ia).array().tanh();
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& y = g.val(out);
        g.grad(ia) += g.grad(out).cwiseProduct((1.0 - y.array().square()).matrix());
    });
}

Var Graph::relu(Var a) {
    const int ia = check(a);
    Matrix v = val(ia).cwiseMax(0.0);
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& x = g.val(ia);
        g.grad(ia) += g.grad(out).cwiseProduct(
            x.unaryExpr([](double e) { return e > 0.0 ? 1.0 : 0.0; }));
    });
}

Var Graph::log(Var a) {
    const int ia = check(a);
    Matrix v = val(ia).array().log();
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out).cwiseQuotient(g.val(ia));
    });
}

Var Graph::clamp(Var a, double lo, double hi) {
    const int ia = check(a);
    Matrix v = val(ia).cwiseMax(lo).cwiseMin(hi);
    return push(std::move(v), [ia, lo, hi, out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& x = g.val(ia);
        // Pass-through inside the interval, zero outside.
        Matrix mask = x.unaryExpr([lo, hi](double e) { return (e >= lo && e <= hi) ? 1.0 : 0.0; });
        g.grad(ia) += g.grad(out).cwiseProduct(mask);
    });
}

Var Graph::softmax_rows(Var a) {
    const int ia = check(a);
    Matrix v = val(ia);
    for (int r = 0; r < v.rows(); ++r) {
        const double m = v.row(r).maxCoeff();
        v.row(r) = (v.row(r).array() - m).exp();
        v.row(r) /= v.row(r).sum();
    }
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& p = g.val(out);
        const Matrix& go = g.grad(out);
        Matrix gi(p.rows(), p.cols());
        for (int r = 0; r < p.rows(); ++r) {
            const double dot = go.row(r).dot(p.row(r));
            gi.row(r) = p.row(r).cwiseProduct((go.row(r).array() - dot).matrix());
        }
        g.grad(ia) += gi;
    });
}

Var Graph::layer_norm_rows(Var a, Var gain, Var bias, double eps) {
    const int ia = check(a), ig = check(gain), ib = check(bias);
    const Matrix& x = val(ia);
    const int n = static_cast<int>(x.cols());
    Matrix xhat(x.rows(), n);
    Eigen::VectorXd inv_std(x.rows());
    for (int r = 0; r < x.rows(); ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
    }
    Matrix v = xhat;
    for (int r = 0; r < v.rows(); ++r) {
        v.row(r) = v.row(r).cwiseProduct(val(ig).row(0)) + val(ib).row(0);
    }
    return push(std::move(v), [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std),
                               out = static_cast<int>(nodes_.size())](Graph& g) {
        const Matrix& go = g.grad(out);
        const Matrix& gamma = g.val(ig);
        for (int r = 0; r < go.rows(); ++r) {
            g.grad(ib).row(0) += go.row(r);
            g.grad(ig).row(0) += go.row(r).cwiseProduct(xhat.row(r));
            const RowVector dxhat = go.row(r).cwiseProduct(gamma.row(0));
            const double m1 = dxhat.mean();
            const double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
            g.grad(ia).row(r) +=
                inv_std(r) * (dxhat.array() - m1 - xhat.row(r).array() * m2).matrix();
        }
    });
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw IntegrityError("concat_rows needs at least one part");
    std::vector<int> ids;
    ids.reserve(parts.size());
    long rows = 0;
    const long cols = val(check(parts[0])).cols();
    for (Var p : parts) {
        const int id = check(p);
        if (val(id).cols() != cols) throw IntegrityError("concat_rows column mismatch");
        rows += val(id).rows();
        ids.push_back(id);
    }
    Matrix v(rows, cols);
    long at = 0;
    for (int id : ids) {
        v.middleRows(at, val(id).rows()) = val(id);
        at += val(id).rows();
    }
    return push(std::move(v), [ids, out = static_cast<int>(nodes_.size())](Graph& g) {
        long at2 = 0;
        for (int id : ids) {
            const long r = g.val(id).rows();
            g.grad(id) += g.grad(out).middleRows(at2, r);
            at2 += r;
        }
    });
}

Var Graph::concat_cols(Var a, Var b) {
    const int ia = check(a), ib = check(b);
    if (val(ia).rows() != val(ib).rows()) throw IntegrityError("concat_cols row mismatch");
    Matrix v(val(ia).rows(), val(ia).cols() + val(ib).cols());
    v << val(ia), val(ib);
    return push(std::move(v), [ia, ib, out = static_cast<int>(nodes_.size())](Graph& g) {
        const long ca = g.val(ia).cols();
        const long cb = g.val(ib).cols();
        g.grad(ia) += g.grad(out).leftCols(ca);
        g.grad(ib) += g.grad(out).rightCols(cb);
    });
}

Var Graph::slice_rows(Var a, int first, int count) {
    const int ia = check(a);
    if (first < 0 || count < 0 || first + count > val(ia).rows()) {
        throw IntegrityError("slice_rows out of range");
    }
    return push(val(ia).middleRows(first, count),
                [ia, first, count, out = static_cast<int>(nodes_.size())](Graph& g) {
                    g.grad(ia).middleRows(first, count) += g.grad(out);
                });
}

Var Graph::transpose(Var a) {
    const int ia = check(a);
    return push(val(ia).transpose(), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia) += g.grad(out).transpose();
    });
}

Var Graph::gather_rows(Var table, std::vector<int> indices) {
    const int it = check(table);
    Matrix v(static_cast<long>(indices.size()), val(it).cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= val(it).rows()) {
            throw IntegrityError("gather_rows index out of range: " + std::to_string(indices[i]));
        }
        v.row(static_cast<long>(i)) = val(it).row(indices[i]);
    }
    return push(std::move(v),
                [it, idx = std::move(indices), out = static_cast<int>(nodes_.size())](Graph& g) {
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                        g.grad(it).row(idx[i]) += g.grad(out).row(static_cast<long>(i));
                    }
                });
}

Var Graph::sum_all(Var a) {
    const int ia = check(a);
    Matrix v(1, 1);
    v(0, 0) = val(ia).sum();
    return push(std::move(v), [ia, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia).array() += g.grad(out)(0, 0);
    });
}

Var Graph::mean_all(Var a) {
    const int ia = check(a);
    const double n = static_cast<double>(val(ia).size());
    Matrix v(1, 1);
    v(0, 0) = val(ia).sum() / n;
    return push(std::move(v), [ia, n, out = static_cast<int>(nodes_.size())](Graph& g) {
        g.grad(ia).array() += g.grad(out)(0, 0) / n;
    });
}

Var Graph::cross_entropy_rows(Var logits, std::vector<int> targets) {
    const int il = check(logits);
    const Matrix& z = val(il);
    if (static_cast<long>(targets.size()) != z.rows()) {
        throw IntegrityError("cross_entropy_rows target count mismatch");
    }
    Matrix probs(z.rows(), z.cols());
    double total = 0.0;
    for (int r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        const double lse = m + std::log((z.row(r).array() - m).exp().sum());
        probs.row(r) = (z.row(r).array() - lse).exp();
        const int t = targets[static_cast<std::size_t>(r)];
        if (t < 0 || t >= z.cols()) throw IntegrityError("cross_entropy_rows target out of range");
        total += lse - z(r, t);
    }
    Matrix v(1, 1);
    v(0, 0) = total;
    return push(std::move(v), [il, probs = std::move(probs), targets = std::move(targets),
                               out = static_cast<int>(nodes_.size())](Graph& g) {
        const double go = g.grad(out)(0, 0);
        Matrix gi = probs;
        for (int r = 0; r < gi.rows(); ++r) gi(r, targets[static_cast<std::size_t>(r)]) -= 1.0;
        g.grad(il) += go * gi;
    });
}

void Graph::backward(Var loss) {
    const int il = check(loss);
    if (backward_done_) throw IntegrityError("Graph::backward may only run once per tape");
    backward_done_ = true;
    if (val(il).rows() != 1 || val(il).cols() != 1) {
        throw IntegrityError("backward requires a 1x1 loss node");
    }
    for (auto& node : nodes_) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    grad(il)(0, 0) = 1.0;
    for (int i = il; i >= 0; --i) {
        auto& node = nodes_[static_cast<std::size_t>(i)];
        if (node.back) node.back(*this);
    }
    for (const auto& [id, p] : bindings_) p->grad += grad(id);
}

} // namespace contextox::nn
