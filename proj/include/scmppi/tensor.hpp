#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scmppi/errors.hpp"
#include "scmppi/kernels.hpp"

namespace scmppi {

// Dense row-major tensor. float is the production precision; the double
// instantiation backs the finite-difference oracle in the tests.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    TensorT(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (numel(shape) != static_cast<std::int64_t>(data.size())) {
            throw DataError("tensor: shape " + shape_str(shape) + " does not match data length " +
                            std::to_string(data.size()));
        }
    }

    static std::int64_t numel(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw DataError("tensor: nonpositive dimension in shape " + shape_str(s));
            n *= d;
        }
        return n;
    }

    static TensorT zeros(std::vector<int> s) {
        const auto n = numel(s);
        return TensorT(std::move(s), std::vector<T>(static_cast<std::size_t>(n), T(0)));
    }

    template <typename U>
    static TensorT from(const TensorT<U>& other) {
        std::vector<T> d(other.data.begin(), other.data.end());
        return TensorT(other.shape, std::move(d));
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    static std::string shape_str(const std::vector<int>& s) {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
        os << ']';
        return os.str();
    }
};

using Tensor = TensorT<float>;

// Record-then-replay reverse-mode tape. Forward values are computed eagerly
// as nodes are appended; backward() runs the recorded closures once, in
// reverse, and refuses to run twice on the same forward pass.
template <typename T>
class TapeT {
public:
    using Value = int;

    struct Node {
        TensorT<T> value;
        std::vector<T> grad;
        bool requires_grad = false;
        std::vector<Value> inputs;
        std::function<void(TapeT&, Node&)> backward_fn;
    };

    Value leaf(TensorT<T> t, bool requires_grad) {
        Node n;
        n.value = std::move(t);
        n.requires_grad = requires_grad;
        nodes_.push_back(std::move(n));
        return static_cast<Value>(nodes_.size() - 1);
    }

    const TensorT<T>& val(Value v) const { return nodes_.at(static_cast<std::size_t>(v)).value; }

    const std::vector<T>& grad(Value v) const {
        const Node& n = nodes_.at(static_cast<std::size_t>(v));
        if (!backward_done_) throw DataError("tape: gradient requested before backward");
        return n.grad;
    }

    bool needs_grad(Value v) const { return nodes_.at(static_cast<std::size_t>(v)).requires_grad; }
    std::size_t num_nodes() const { return nodes_.size(); }

    // ---- operations ------------------------------------------------------

    // y[o] = b[o] + sum_i w[o,i] * x[i]
    Value dense(Value x, Value w, Value b) {
        const auto& xv = val(x);
        const auto& wv = val(w);
        const auto& bv = val(b);
        if (xv.shape.size() != 1 || wv.shape.size() != 2 || bv.shape.size() != 1 ||
            wv.shape[1] != xv.shape[0] || wv.shape[0] != bv.shape[0]) {
            throw DataError("dense: incompatible shapes x=" + Tensor::shape_str(xv.shape) +
                            " w=" + Tensor::shape_str(wv.shape) +
                            " b=" + Tensor::shape_str(bv.shape));
        }
        const int n_out = wv.shape[0];
        const int n_in = wv.shape[1];
        TensorT<T> out = TensorT<T>::zeros({n_out});
        for (int o = 0; o < n_out; ++o) {
            const double acc =
                kernels::dot(wv.data.data() + static_cast<std::size_t>(o) * n_in, xv.data.data(),
                             static_cast<std::size_t>(n_in));
            out.data[static_cast<std::size_t>(o)] = static_cast<T>(acc + bv.data[o]);
        }
        return append(std::move(out), {x, w, b}, [n_out, n_in](TapeT& t, Node& n) {
            const Value x_id = n.inputs[0], w_id = n.inputs[1], b_id = n.inputs[2];
            const auto& wv2 = t.val(w_id);
            const auto& xv2 = t.val(x_id);
            for (int o = 0; o < n_out; ++o) {
                const T g = n.grad[static_cast<std::size_t>(o)];
                if (t.needs_grad(x_id)) {
                    kernels::axpy(g, wv2.data.data() + static_cast<std::size_t>(o) * n_in,
                                  t.grad_buf(x_id), static_cast<std::size_t>(n_in));
                }
                if (t.needs_grad(w_id)) {
                    kernels::axpy(g, xv2.data.data(),
                                  t.grad_buf(w_id) + static_cast<std::size_t>(o) * n_in,
                                  static_cast<std::size_t>(n_in));
                }
                if (t.needs_grad(b_id)) t.grad_buf(b_id)[o] += g;
            }
        });
    }

    // Cross-correlation of x [C,H,W] with kernels [F,C,kh,kw].
    Value conv2d(Value x, Value k, int stride, int padding) {
        const auto& xv = val(x);
        const auto& kv = val(k);
        if (xv.shape.size() != 3 || kv.shape.size() != 4 || kv.shape[1] != xv.shape[0]) {
            throw DataError("conv2d: incompatible shapes x=" + Tensor::shape_str(xv.shape) +
                            " kernels=" + Tensor::shape_str(kv.shape));
        }
        if (stride < 1) throw DataError("conv2d: stride must be positive");
        if (padding < 0) throw DataError("conv2d: padding must be nonnegative");
        const int C = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
        const int F = kv.shape[0], kh = kv.shape[2], kw = kv.shape[3];
        if (kh > H + 2 * padding || kw > W + 2 * padding) {
            throw DataError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                            " larger than padded input " + std::to_string(H + 2 * padding) + "x" +
                            std::to_string(W + 2 * padding));
        }
        const int Ho = (H + 2 * padding - kh) / stride + 1;
        const int Wo = (W + 2 * padding - kw) / stride + 1;
        const int patch = C * kh * kw;
        const int pixels = Ho * Wo;

        std::vector<T> col;
        fill_col(xv, C, H, W, kh, kw, stride, padding, Ho, Wo, col);

        TensorT<T> out = TensorT<T>::zeros({F, Ho, Wo});
        for (int f = 0; f < F; ++f) {
            const T* krow = kv.data.data() + static_cast<std::size_t>(f) * patch;
            for (int p = 0; p < pixels; ++p) {
                out.data[static_cast<std::size_t>(f) * pixels + p] = static_cast<T>(
                    kernels::dot(krow, col.data() + static_cast<std::size_t>(p) * patch,
                                 static_cast<std::size_t>(patch)));
            }
        }
        auto geom = [=](TapeT& t, Node& n) {
            const Value x_id = n.inputs[0], k_id = n.inputs[1];
            const auto& xv2 = t.val(x_id);
            const auto& kv2 = t.val(k_id);
            std::vector<T> col2;
            fill_col(xv2, C, H, W, kh, kw, stride, padding, Ho, Wo, col2);
            std::vector<T> gcol;
            if (t.needs_grad(x_id)) gcol.assign(col2.size(), T(0));
            for (int f = 0; f < F; ++f) {
                const T* krow = kv2.data.data() + static_cast<std::size_t>(f) * patch;
                for (int p = 0; p < pixels; ++p) {
                    const T g = n.grad[static_cast<std::size_t>(f) * pixels + p];
                    if (g == T(0)) continue;
                    if (t.needs_grad(k_id)) {
                        kernels::axpy(g, col2.data() + static_cast<std::size_t>(p) * patch,
                                      t.grad_buf(k_id) + static_cast<std::size_t>(f) * patch,
                                      static_cast<std::size_t>(patch));
                    }
                    if (t.needs_grad(x_id)) {
                        kernels::axpy(g, krow, gcol.data() + static_cast<std::size_t>(p) * patch,
                                      static_cast<std::size_t>(patch));
                    }
                }
            }
            if (t.needs_grad(x_id)) {
                scatter_col(gcol, C, H, W, kh, kw, stride, padding, Ho, Wo, t.grad_buf(x_id));
            }
        };
        return append(std::move(out), {x, k}, std::move(geom));
    }

    // Max over window x window blocks; edge windows are truncated, so the
    // output is ceil(H/w) x ceil(W/w). Ties resolve to the first element in
    // row-major scan order.
    Value maxpool2(Value x, int window) {
        const auto& xv = val(x);
        if (xv.shape.size() != 3) {
            throw DataError("maxpool2: expected [C,H,W], got " + Tensor::shape_str(xv.shape));
        }
        if (window < 1) throw DataError("maxpool2: window must be positive");
        const int C = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
        const int Ho = (H + window - 1) / window;
        const int Wo = (W + window - 1) / window;
        TensorT<T> out = TensorT<T>::zeros({C, Ho, Wo});
        std::vector<std::int32_t> argmax(out.data.size());
        for (int c = 0; c < C; ++c) {
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    const int y0 = oy * window, x0 = ox * window;
                    const int y1 = std::min(y0 + window, H), x1 = std::min(x0 + window, W);
                    int best = (c * H + y0) * W + x0;
                    T bestv = xv.data[static_cast<std::size_t>(best)];
                    for (int yy = y0; yy < y1; ++yy) {
                        for (int xx = x0; xx < x1; ++xx) {
                            const int idx = (c * H + yy) * W + xx;
                            if (xv.data[static_cast<std::size_t>(idx)] > bestv) {
                                bestv = xv.data[static_cast<std::size_t>(idx)];
                                best = idx;
                            }
                        }
                    }
                    const std::size_t o = static_cast<std::size_t>((c * Ho + oy) * Wo + ox);
                    out.data[o] = bestv;
                    argmax[o] = best;
                }
            }
        }
        return append(std::move(out), {x},
                      [argmax = std::move(argmax)](TapeT& t, Node& n) {
                          if (!t.needs_grad(n.inputs[0])) return;
                          T* gx = t.grad_buf(n.inputs[0]);
                          for (std::size_t o = 0; o < argmax.size(); ++o) {
                              gx[argmax[o]] += n.grad[o];
                          }
                      });
    }

    Value relu(Value x) {
        const auto& xv = val(x);
        TensorT<T> out = TensorT<T>::zeros(xv.shape);
        kernels::relu(xv.data.data(), out.data.data(), xv.data.size());
        return append(std::move(out), {x}, [](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            const auto& xv2 = t.val(n.inputs[0]);
            T* gx = t.grad_buf(n.inputs[0]);
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                if (xv2.data[i] > T(0)) gx[i] += n.grad[i];
            }
        });
    }

    // Elementwise logistic, clamped into [1e-7, 1-1e-7] so downstream logs
    // stay finite.
    Value sigmoid(Value x) {
        const auto& xv = val(x);
        TensorT<T> out = TensorT<T>::zeros(xv.shape);
        for (std::size_t i = 0; i < xv.data.size(); ++i) {
            double y = 1.0 / (1.0 + std::exp(-static_cast<double>(xv.data[i])));
            y = std::min(1.0 - 1e-7, std::max(1e-7, y));
            out.data[i] = static_cast<T>(y);
        }
        return append(std::move(out), {x}, [](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            T* gx = t.grad_buf(n.inputs[0]);
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                const T y = n.value.data[i];
                gx[i] += n.grad[i] * y * (T(1) - y);
            }
        });
    }

    // y = x / (||x|| + eps)
    Value l2_normalize(Value x, double eps) {
        const auto& xv = val(x);
        const double norm = std::sqrt(kernels::sum_sq(xv.data.data(), xv.data.size()));
        const double denom = norm + eps;
        TensorT<T> out = TensorT<T>::zeros(xv.shape);
        for (std::size_t i = 0; i < xv.data.size(); ++i) {
            out.data[i] = static_cast<T>(static_cast<double>(xv.data[i]) / denom);
        }
        return append(std::move(out), {x}, [norm, denom](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            const auto& xv2 = t.val(n.inputs[0]);
            T* gx = t.grad_buf(n.inputs[0]);
            if (norm < 1e-30) {
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    gx[i] += static_cast<T>(static_cast<double>(n.grad[i]) / denom);
                }
                return;
            }
            const double gdotx =
                kernels::dot(n.grad.data(), xv2.data.data(), n.grad.size());
            const double coef = gdotx / (norm * denom * denom);
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                gx[i] += static_cast<T>(static_cast<double>(n.grad[i]) / denom -
                                        coef * static_cast<double>(xv2.data[i]));
            }
        });
    }

    // Flattened 1-D concatenation.
    Value concat(const std::vector<Value>& parts) {
        if (parts.empty()) throw DataError("concat: no inputs");
        std::int64_t total = 0;
        for (Value p : parts) total += val(p).size();
        TensorT<T> out = TensorT<T>::zeros({static_cast<int>(total)});
        std::size_t off = 0;
        for (Value p : parts) {
            const auto& pv = val(p);
            std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + off);
            off += pv.data.size();
        }
        return append(std::move(out), parts, [](TapeT& t, Node& n) {
            std::size_t off2 = 0;
            for (Value p : n.inputs) {
                const std::size_t len = t.val(p).data.size();
                if (t.needs_grad(p)) {
                    T* gp = t.grad_buf(p);
                    for (std::size_t i = 0; i < len; ++i) gp[i] += n.grad[off2 + i];
                }
                off2 += len;
            }
        });
    }

    Value add(Value a, Value b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        if (av.shape != bv.shape) {
            throw DataError("add: shape mismatch " + Tensor::shape_str(av.shape) + " vs " +
                            Tensor::shape_str(bv.shape));
        }
        TensorT<T> out = TensorT<T>::zeros(av.shape);
        kernels::add(av.data.data(), bv.data.data(), out.data.data(), av.data.size());
        return append(std::move(out), {a, b}, [](TapeT& t, Node& n) {
            for (Value in : n.inputs) {
                if (!t.needs_grad(in)) continue;
                T* g = t.grad_buf(in);
                for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
            }
        });
    }

    Value mul(Value a, Value b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        if (av.shape != bv.shape) {
            throw DataError("mul: shape mismatch " + Tensor::shape_str(av.shape) + " vs " +
                            Tensor::shape_str(bv.shape));
        }
        TensorT<T> out = TensorT<T>::zeros(av.shape);
        for (std::size_t i = 0; i < av.data.size(); ++i) out.data[i] = av.data[i] * bv.data[i];
        return append(std::move(out), {a, b}, [](TapeT& t, Node& n) {
            const auto& av2 = t.val(n.inputs[0]);
            const auto& bv2 = t.val(n.inputs[1]);
            if (t.needs_grad(n.inputs[0])) {
                T* ga = t.grad_buf(n.inputs[0]);
                for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * bv2.data[i];
            }
            if (t.needs_grad(n.inputs[1])) {
                T* gb = t.grad_buf(n.inputs[1]);
                for (std::size_t i = 0; i < n.grad.size(); ++i) gb[i] += n.grad[i] * av2.data[i];
            }
        });
    }

    Value scale_const(Value x, double c) {
        const auto& xv = val(x);
        TensorT<T> out = TensorT<T>::zeros(xv.shape);
        for (std::size_t i = 0; i < xv.data.size(); ++i) {
            out.data[i] = static_cast<T>(c * static_cast<double>(xv.data[i]));
        }
        return append(std::move(out), {x}, [c](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            T* gx = t.grad_buf(n.inputs[0]);
            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                gx[i] += static_cast<T>(c * static_cast<double>(n.grad[i]));
            }
        });
    }

    Value sum_all(Value x) {
        const auto& xv = val(x);
        TensorT<T> out({1}, {static_cast<T>(kernels::sum(xv.data.data(), xv.data.size()))});
        return append(std::move(out), {x}, [](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            T* gx = t.grad_buf(n.inputs[0]);
            const std::size_t len = t.val(n.inputs[0]).data.size();
            for (std::size_t i = 0; i < len; ++i) gx[i] += n.grad[0];
        });
    }

    Value mean_all(Value x) { return scale_const(sum_all(x), 1.0 / val(x).size()); }

    Value pick(Value x, int index) {
        const auto& xv = val(x);
        if (index < 0 || index >= xv.size()) throw DataError("pick: index out of range");
        TensorT<T> out({1}, {xv.data[static_cast<std::size_t>(index)]});
        return append(std::move(out), {x}, [index](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            t.grad_buf(n.inputs[0])[index] += n.grad[0];
        });
    }

    Value reshape(Value x, std::vector<int> shape) {
        const auto& xv = val(x);
        if (Tensor::numel(shape) != xv.size()) {
            throw DataError("reshape: element count mismatch for " + Tensor::shape_str(shape));
        }
        TensorT<T> out(std::move(shape), xv.data);
        return append(std::move(out), {x}, [](TapeT& t, Node& n) {
            if (!t.needs_grad(n.inputs[0])) return;
            T* gx = t.grad_buf(n.inputs[0]);
            for (std::size_t i = 0; i < n.grad.size(); ++i) gx[i] += n.grad[i];
        });
    }

    // k same-length vectors -> [k, d] matrix.
    Value stack_rows(const std::vector<Value>& rows) {
        if (rows.empty()) throw DataError("stack_rows: no inputs");
        const int d = static_cast<int>(val(rows[0]).size());
        for (Value r : rows) {
            if (val(r).size() != d) throw DataError("stack_rows: row length mismatch");
        }
        TensorT<T> out = TensorT<T>::zeros({static_cast<int>(rows.size()), d});
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& rv = val(rows[r]);
            std::copy(rv.data.begin(), rv.data.end(), out.data.begin() + r * d);
        }
        return append(std::move(out), rows, [d](TapeT& t, Node& n) {
            for (std::size_t r = 0; r < n.inputs.size(); ++r) {
                if (!t.needs_grad(n.inputs[r])) continue;
                T* g = t.grad_buf(n.inputs[r]);
                for (int i = 0; i < d; ++i) g[i] += n.grad[r * d + i];
            }
        });
    }

    // Scalar node with an externally computed value and d(value)/d(input).
    // Used by the loss heads whose forward/backward math lives outside the
    // tape (contrastive losses, BCE).
    Value scalar_with_grad(Value input, double value, std::vector<T> d_input) {
        if (d_input.size() != val(input).data.size()) {
            throw DataError("scalar_with_grad: gradient length mismatch");
        }
        TensorT<T> out({1}, {static_cast<T>(value)});
        return append(std::move(out), {input},
                      [d = std::move(d_input)](TapeT& t, Node& n) {
                          if (!t.needs_grad(n.inputs[0])) return;
                          kernels::axpy(n.grad[0], d.data(), t.grad_buf(n.inputs[0]), d.size());
                      });
    }

    // total = a + kappa * b, on scalars.
    Value add_scaled(Value a, Value b, double kappa) {
        if (val(a).size() != 1 || val(b).size() != 1) {
            throw DataError("add_scaled: operands must be scalars");
        }
        TensorT<T> out({1}, {static_cast<T>(static_cast<double>(val(a).data[0]) +
                                            kappa * static_cast<double>(val(b).data[0]))});
        return append(std::move(out), {a, b}, [kappa](TapeT& t, Node& n) {
            if (t.needs_grad(n.inputs[0])) t.grad_buf(n.inputs[0])[0] += n.grad[0];
            if (t.needs_grad(n.inputs[1])) {
                t.grad_buf(n.inputs[1])[0] += static_cast<T>(kappa * static_cast<double>(n.grad[0]));
            }
        });
    }

    // ---- reverse pass ----------------------------------------------------

    void backward(Value loss) {
        if (backward_done_) {
            throw DataError("tape: backward already ran on this forward pass");
        }
        Node& ln = nodes_.at(static_cast<std::size_t>(loss));
        if (ln.value.size() != 1) {
            throw DataError("tape: backward requires a scalar loss, got shape " +
                            Tensor::shape_str(ln.value.shape));
        }
        backward_done_ = true;

        // Mark the subgraph that actually reaches the loss.
        std::vector<char> reachable(nodes_.size(), 0);
        std::vector<Value> stack{loss};
        reachable[static_cast<std::size_t>(loss)] = 1;
        while (!stack.empty()) {
            const Value v = stack.back();
            stack.pop_back();
            for (Value in : nodes_[static_cast<std::size_t>(v)].inputs) {
                if (!reachable[static_cast<std::size_t>(in)] &&
                    nodes_[static_cast<std::size_t>(in)].requires_grad) {
                    reachable[static_cast<std::size_t>(in)] = 1;
                    stack.push_back(in);
                }
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (reachable[i]) nodes_[i].grad.assign(nodes_[i].value.data.size(), T(0));
        }
        ln.grad.assign(1, T(1));
        for (std::int64_t i = loss; i >= 0; --i) {
            Node& n = nodes_[static_cast<std::size_t>(i)];
            if (!reachable[static_cast<std::size_t>(i)] || !n.backward_fn) continue;
            n.backward_fn(*this, n);
        }
    }

    T* grad_buf(Value v) {
        Node& n = nodes_.at(static_cast<std::size_t>(v));
        if (n.grad.size() != n.value.data.size()) n.grad.assign(n.value.data.size(), T(0));
        return n.grad.data();
    }

private:
    Value append(TensorT<T> value, std::vector<Value> inputs,
                 std::function<void(TapeT&, Node&)> backward_fn) {
        if (backward_done_) {
            throw DataError("tape: cannot extend a tape after backward; start a new forward pass");
        }
        Node n;
        n.value = std::move(value);
        n.inputs = std::move(inputs);
        for (Value in : n.inputs) {
            n.requires_grad = n.requires_grad || nodes_.at(static_cast<std::size_t>(in)).requires_grad;
        }
        if (n.requires_grad) n.backward_fn = std::move(backward_fn);
        nodes_.push_back(std::move(n));
        return static_cast<Value>(nodes_.size() - 1);
    }

    static void fill_col(const TensorT<T>& x, int C, int H, int W, int kh, int kw, int stride,
                         int padding, int Ho, int Wo, std::vector<T>& col) {
        const int patch = C * kh * kw;
        col.assign(static_cast<std::size_t>(Ho) * Wo * patch, T(0));
        for (int oy = 0; oy < Ho; ++oy) {
            for (int ox = 0; ox < Wo; ++ox) {
                T* dst = col.data() + (static_cast<std::size_t>(oy) * Wo + ox) * patch;
                for (int c = 0; c < C; ++c) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int yy = oy * stride - padding + ky;
                        if (yy < 0 || yy >= H) {
                            dst += kw;
                            continue;
                        }
                        for (int kx = 0; kx < kw; ++kx) {
                            const int xx = ox * stride - padding + kx;
                            *dst++ = (xx < 0 || xx >= W)
                                         ? T(0)
                                         : x.data[(static_cast<std::size_t>(c) * H + yy) * W + xx];
                        }
                    }
                }
            }
        }
    }

    static void scatter_col(const std::vector<T>& gcol, int C, int H, int W, int kh, int kw,
                            int stride, int padding, int Ho, int Wo, T* gx) {
        const int patch = C * kh * kw;
        for (int oy = 0; oy < Ho; ++oy) {
            for (int ox = 0; ox < Wo; ++ox) {
                const T* src = gcol.data() + (static_cast<std::size_t>(oy) * Wo + ox) * patch;
                for (int c = 0; c < C; ++c) {
                    for (int ky = 0; ky < kh; ++ky) {
                        const int yy = oy * stride - padding + ky;
                        if (yy < 0 || yy >= H) {
                            src += kw;
                            continue;
                        }
                        for (int kx = 0; kx < kw; ++kx) {
                            const int xx = ox * stride - padding + kx;
                            const T g = *src++;
                            if (xx < 0 || xx >= W || g == T(0)) continue;
                            gx[(static_cast<std::size_t>(c) * H + yy) * W + xx] += g;
                        }
                    }
                }
            }
        }
    }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

using Tape = TapeT<float>;

// Places a float tensor onto a tape of any precision.
template <typename T>
typename TapeT<T>::Value make_leaf(TapeT<T>& tape, const Tensor& v, bool requires_grad = false) {
    return tape.leaf(TensorT<T>::from(v), requires_grad);
}

// ---- parameters and optimizer ---------------------------------------------

struct AdamWConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Named parameter set with per-parameter Adam moments and a global step
// counter. Insertion order is the canonical order used for gradient vectors
// and checkpoint blobs.
class ParamStore {
public:
    std::size_t add(const std::string& name, Tensor init, bool trainable = true);

    std::size_t count() const { return params_.size(); }
    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    const std::string& name(std::size_t i) const { return params_[i].name; }
    Tensor& value(std::size_t i) { return params_[i].value; }
    const Tensor& value(std::size_t i) const { return params_[i].value; }
    Tensor& value(const std::string& name) { return params_[at(name)].value; }
    const Tensor& value(const std::string& name) const { return params_[at(name)].value; }
    bool trainable(std::size_t i) const { return params_[i].trainable; }
    const Tensor& first_moment(std::size_t i) const { return params_[i].m; }
    const Tensor& second_moment(std::size_t i) const { return params_[i].v; }
    std::int64_t step() const { return step_; }

    // Decoupled weight decay update; increments the step counter by one.
    void adamw_step(const std::vector<std::vector<float>>& grads, const AdamWConfig& cfg);

    void zero_all();

private:
    struct Param {
        std::string name;
        Tensor value;
        Tensor m, v;
        bool trainable = true;
    };

    std::size_t at(const std::string& name) const;

    std::vector<Param> params_;
    std::map<std::string, std::size_t> index_;
    std::int64_t step_ = 0;
};

}  // namespace scmppi
