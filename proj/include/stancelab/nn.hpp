// Minimal reverse-mode numeric core. Each layer exposes a forward pass that
// records what its backward pass needs, and a backward pass that accumulates
// parameter gradients and returns the gradient with respect to its input.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stancelab/util.hpp"

namespace stancelab::nn {

enum class Mode { Train, Eval };

template <class T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty when the tensor carries no gradient slot

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, T fill = T(0))
        : shape(std::move(dims)), data(count(shape), fill) {}

    static std::size_t count(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    std::size_t size() const { return data.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }

    T& operator[](std::size_t i) { return data[i]; }
    const T& operator[](std::size_t i) const { return data[i]; }
    T& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    const T& at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    T* row(std::size_t r) { return data.data() + r * cols(); }
    const T* row(std::size_t r) const { return data.data() + r * cols(); }

    bool has_grad() const { return !grad.empty(); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

    bool all_finite() const {
        return std::all_of(data.begin(), data.end(), [](T v) { return std::isfinite(v); });
    }
};

inline std::string shape_string(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
    return s;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

template <class T>
T sigmoid(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    T e = std::exp(x);
    return e / (T(1) + e);
}

// y += M x for row-major M [rows x cols].
template <class T>
void gemv_acc(const T* m, std::size_t rows, std::size_t cols, const T* x, T* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* mr = m + r * cols;
        T acc = T(0);
        for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * x[c];
        y[r] += acc;
    }
}

// y += M^T g
template <class T>
void gemv_t_acc(const T* m, std::size_t rows, std::size_t cols, const T* g, T* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T gr = g[r];
        if (gr == T(0)) continue;
        const T* mr = m + r * cols;
        for (std::size_t c = 0; c < cols; ++c) y[c] += mr[c] * gr;
    }
}

// M += g x^T
template <class T>
void outer_acc(T* m, std::size_t rows, std::size_t cols, const T* g, const T* x) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T gr = g[r];
        if (gr == T(0)) continue;
        T* mr = m + r * cols;
        for (std::size_t c = 0; c < cols; ++c) mr[c] += gr * x[c];
    }
}

}  // namespace detail

// ---------------------------------------------------------------- embedding

/// Rows of `table` [V x d] selected by `ids`; output [ids.size() x d].
template <class T>
Tensor<T> embed_lookup(const Tensor<T>& table, std::span<const int> ids) {
    const std::size_t vocab = table.rows(), d = table.cols();
    Tensor<T> out({ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab)
            throw std::out_of_range("embed_lookup: id " + std::to_string(ids[i]) + " outside vocabulary of size " +
                                    std::to_string(vocab));
        std::copy_n(table.row(static_cast<std::size_t>(ids[i])), d, out.row(i));
    }
    return out;
}

template <class T>
void embed_lookup_backward(Tensor<T>& table, std::span<const int> ids, const Tensor<T>& grad_out) {
    table.ensure_grad();
    const std::size_t d = table.cols();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        T* g = table.grad.data() + static_cast<std::size_t>(ids[i]) * d;
        const T* go = grad_out.row(i);
        for (std::size_t c = 0; c < d; ++c) g[c] += go[c];
    }
}

// ---------------------------------------------------------------- conv1d

template <class T>
struct Conv1dParams {
    Tensor<T> kernels;  // [F x d_in x k]
    Tensor<T> bias;     // [F]

    std::size_t filters() const { return kernels.dim(0); }
    std::size_t in_channels() const { return kernels.dim(1); }
    std::size_t width() const { return kernels.dim(2); }
};

/// Same-padded convolution followed by ReLU. Input [n x d_in], output [n x F].
template <class T>
Tensor<T> conv1d(const Tensor<T>& input, const Conv1dParams<T>& p) {
    const std::size_t n = input.rows(), din = input.cols();
    const std::size_t F = p.filters(), k = p.width();
    detail::require(k % 2 == 1, "conv1d: kernel width must be odd");
    detail::require(din == p.in_channels(), "conv1d: input has " + std::to_string(din) + " channels, kernels expect " +
                                                std::to_string(p.in_channels()));
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    Tensor<T> out({n, F});
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
            T acc = p.bias[f];
            const T* kf = p.kernels.data.data() + f * din * k;
            for (std::size_t j = 0; j < k; ++j) {
                std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - half;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
                const T* x = input.row(static_cast<std::size_t>(src));
                for (std::size_t c = 0; c < din; ++c) acc += kf[c * k + j] * x[c];
            }
            out.at(t, f) = acc > T(0) ? acc : T(0);
        }
    }
    return out;
}

/// Backward through ReLU and the convolution; `output` is the forward result.
template <class T>
Tensor<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& output, Conv1dParams<T>& p,
                          const Tensor<T>& grad_out) {
    const std::size_t n = input.rows(), din = input.cols();
    const std::size_t F = p.filters(), k = p.width();
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    p.kernels.ensure_grad();
    p.bias.ensure_grad();
    Tensor<T> grad_in({n, din});
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t f = 0; f < F; ++f) {
            if (output.at(t, f) <= T(0)) continue;
            const T g = grad_out.at(t, f);
            if (g == T(0)) continue;
            p.bias.grad[f] += g;
            const T* kf = p.kernels.data.data() + f * din * k;
            T* gkf = p.kernels.grad.data() + f * din * k;
            for (std::size_t j = 0; j < k; ++j) {
                std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(j) - half;
                if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
                const T* x = input.row(static_cast<std::size_t>(src));
                T* gx = grad_in.row(static_cast<std::size_t>(src));
                for (std::size_t c = 0; c < din; ++c) {
                    gkf[c * k + j] += g * x[c];
                    gx[c] += g * kf[c * k + j];
                }
            }
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------- LSTM

/// One direction. Gate blocks are stacked in the order i, f, g, o.
template <class T>
struct LstmParams {
    Tensor<T> W;  // [4h x d_in]
    Tensor<T> U;  // [4h x h]
    Tensor<T> b;  // [4h]

    std::size_t hidden() const { return U.cols(); }
    std::size_t input_size() const { return W.cols(); }
};

template <class T>
struct BiLstmParams {
    LstmParams<T> fwd;
    LstmParams<T> bwd;
};

template <class T>
struct LstmTrace {
    std::size_t steps = 0;
    std::vector<T> gates;  // [steps x 4h], activated
    std::vector<T> c;      // [steps x h]
    std::vector<T> h;      // [steps x h]
    std::vector<T> tanh_c; // [steps x h]
    std::vector<std::size_t> order;  // input row consumed at each step
};

template <class T>
LstmTrace<T> lstm_forward(const Tensor<T>& input, const LstmParams<T>& p, std::vector<std::size_t> order) {
    const std::size_t H = p.hidden(), din = p.input_size();
    detail::require(input.cols() == din, "lstm: input has " + std::to_string(input.cols()) +
                                             " features, weights expect " + std::to_string(din));
    LstmTrace<T> tr;
    tr.steps = order.size();
    tr.order = std::move(order);
    tr.gates.assign(tr.steps * 4 * H, T(0));
    tr.c.assign(tr.steps * H, T(0));
    tr.h.assign(tr.steps * H, T(0));
    tr.tanh_c.assign(tr.steps * H, T(0));
    std::vector<T> z(4 * H);
    for (std::size_t s = 0; s < tr.steps; ++s) {
        std::copy(p.b.data.begin(), p.b.data.end(), z.begin());
        detail::gemv_acc(p.W.data.data(), 4 * H, din, input.row(tr.order[s]), z.data());
        if (s > 0) detail::gemv_acc(p.U.data.data(), 4 * H, H, tr.h.data() + (s - 1) * H, z.data());
        T* g = tr.gates.data() + s * 4 * H;
        T* c = tr.c.data() + s * H;
        T* h = tr.h.data() + s * H;
        T* tc = tr.tanh_c.data() + s * H;
        const T* c_prev = s > 0 ? tr.c.data() + (s - 1) * H : nullptr;
        for (std::size_t u = 0; u < H; ++u) {
            T ig = detail::sigmoid(z[u]);
            T fg = detail::sigmoid(z[H + u]);
            T gg = std::tanh(z[2 * H + u]);
            T og = detail::sigmoid(z[3 * H + u]);
            g[u] = ig;
            g[H + u] = fg;
            g[2 * H + u] = gg;
            g[3 * H + u] = og;
            c[u] = (c_prev ? fg * c_prev[u] : T(0)) + ig * gg;
            tc[u] = std::tanh(c[u]);
            h[u] = og * tc[u];
        }
    }
    return tr;
}

/// `grad_h` holds dLoss/dh for every step ([steps x h]); accumulates parameter
/// gradients and adds dLoss/dx into `grad_in` rows given by the trace order.
template <class T>
void lstm_backward(const Tensor<T>& input, LstmParams<T>& p, const LstmTrace<T>& tr, const std::vector<T>& grad_h,
                   Tensor<T>& grad_in) {
    const std::size_t H = p.hidden(), din = p.input_size();
    p.W.ensure_grad();
    p.U.ensure_grad();
    p.b.ensure_grad();
    std::vector<T> dh_next(H, T(0)), dc_next(H, T(0)), dz(4 * H);
    for (std::size_t s = tr.steps; s-- > 0;) {
        const T* g = tr.gates.data() + s * 4 * H;
        const T* tc = tr.tanh_c.data() + s * H;
        const T* c_prev = s > 0 ? tr.c.data() + (s - 1) * H : nullptr;
        for (std::size_t u = 0; u < H; ++u) {
            const T ig = g[u], fg = g[H + u], gg = g[2 * H + u], og = g[3 * H + u];
            const T dh = grad_h[s * H + u] + dh_next[u];
            const T dc = dh * og * (T(1) - tc[u] * tc[u]) + dc_next[u];
            dz[u] = dc * gg * ig * (T(1) - ig);
            dz[H + u] = c_prev ? dc * c_prev[u] * fg * (T(1) - fg) : T(0);
            dz[2 * H + u] = dc * ig * (T(1) - gg * gg);
            dz[3 * H + u] = dh * tc[u] * og * (T(1) - og);
            dc_next[u] = dc * fg;
        }
        const T* x = input.row(tr.order[s]);
        detail::outer_acc(p.W.grad.data(), 4 * H, din, dz.data(), x);
        for (std::size_t r = 0; r < 4 * H; ++r) p.b.grad[r] += dz[r];
        detail::gemv_t_acc(p.W.data.data(), 4 * H, din, dz.data(), grad_in.row(tr.order[s]));
        std::fill(dh_next.begin(), dh_next.end(), T(0));
        if (s > 0) {
            detail::outer_acc(p.U.grad.data(), 4 * H, H, dz.data(), tr.h.data() + (s - 1) * H);
            detail::gemv_t_acc(p.U.data.data(), 4 * H, H, dz.data(), dh_next.data());
        }
    }
}

template <class T>
struct BiLstmTrace {
    std::size_t rows = 0;
    std::size_t length = 0;
    LstmTrace<T> fwd;
    LstmTrace<T> bwd;
};

template <class T>
struct BiLstmOutput {
    Tensor<T> seq;    // [L x 2h], zero beyond true_length
    Tensor<T> final;  // [2h]: forward state at the last valid step, backward state at step 1
    BiLstmTrace<T> trace;
};

/// Bidirectional LSTM over the first `true_length` rows of `input`. Rows past
/// `true_length` are never read and produce zero output.
template <class T>
BiLstmOutput<T> bilstm(const Tensor<T>& input, const BiLstmParams<T>& p, std::size_t true_length) {
    const std::size_t L = input.rows(), H = p.fwd.hidden();
    detail::require(true_length >= 1, "bilstm: true_length must be at least 1");
    detail::require(true_length <= L, "bilstm: true_length " + std::to_string(true_length) +
                                          " exceeds sequence length " + std::to_string(L));
    detail::require(p.bwd.hidden() == H, "bilstm: direction hidden sizes differ");
    std::vector<std::size_t> forward(true_length), backward(true_length);
    std::iota(forward.begin(), forward.end(), std::size_t{0});
    for (std::size_t s = 0; s < true_length; ++s) backward[s] = true_length - 1 - s;

    BiLstmOutput<T> out;
    out.trace.rows = L;
    out.trace.length = true_length;
    out.trace.fwd = lstm_forward(input, p.fwd, forward);
    out.trace.bwd = lstm_forward(input, p.bwd, backward);
    out.seq = Tensor<T>({L, 2 * H});
    for (std::size_t s = 0; s < true_length; ++s) {
        std::copy_n(out.trace.fwd.h.data() + s * H, H, out.seq.row(s));
        std::copy_n(out.trace.bwd.h.data() + s * H, H, out.seq.row(backward[s]) + H);
    }
    out.final = Tensor<T>({2 * H});
    std::copy_n(out.trace.fwd.h.data() + (true_length - 1) * H, H, out.final.data.data());
    std::copy_n(out.trace.bwd.h.data() + (true_length - 1) * H, H, out.final.data.data() + H);
    return out;
}

/// Either gradient may be empty (treated as zero).
template <class T>
Tensor<T> bilstm_backward(const Tensor<T>& input, BiLstmParams<T>& p, const BiLstmTrace<T>& tr,
                          const Tensor<T>& grad_seq, const Tensor<T>& grad_final) {
    const std::size_t H = p.fwd.hidden(), n = tr.length;
    std::vector<T> gf(n * H, T(0)), gb(n * H, T(0));
    if (grad_seq.size() > 0) {
        for (std::size_t s = 0; s < n; ++s) {
            std::copy_n(grad_seq.row(tr.fwd.order[s]), H, gf.data() + s * H);
            std::copy_n(grad_seq.row(tr.bwd.order[s]) + H, H, gb.data() + s * H);
        }
    }
    if (grad_final.size() > 0) {
        for (std::size_t u = 0; u < H; ++u) {
            gf[(n - 1) * H + u] += grad_final[u];
            gb[(n - 1) * H + u] += grad_final[H + u];
        }
    }
    Tensor<T> grad_in({tr.rows, input.cols()});
    lstm_backward(input, p.fwd, tr.fwd, gf, grad_in);
    lstm_backward(input, p.bwd, tr.bwd, gb, grad_in);
    return grad_in;
}

// ---------------------------------------------------------------- dense / softmax / loss

template <class T>
struct DenseParams {
    Tensor<T> W;  // [C x d_in]
    Tensor<T> b;  // [C]
};

template <class T>
Tensor<T> dense(const Tensor<T>& x, const DenseParams<T>& p) {
    const std::size_t C = p.W.rows(), din = p.W.cols();
    detail::require(x.size() == din, "dense: input has " + std::to_string(x.size()) + " features, weights expect " +
                                         std::to_string(din));
    detail::require(p.b.size() == C, "dense: bias length mismatch");
    Tensor<T> out({C});
    std::copy(p.b.data.begin(), p.b.data.end(), out.data.begin());
    detail::gemv_acc(p.W.data.data(), C, din, x.data.data(), out.data.data());
    return out;
}

template <class T>
Tensor<T> dense_backward(const Tensor<T>& x, DenseParams<T>& p, const Tensor<T>& grad_out) {
    const std::size_t C = p.W.rows(), din = p.W.cols();
    p.W.ensure_grad();
    p.b.ensure_grad();
    detail::outer_acc(p.W.grad.data(), C, din, grad_out.data.data(), x.data.data());
    for (std::size_t c = 0; c < C; ++c) p.b.grad[c] += grad_out[c];
    Tensor<T> grad_in({din});
    detail::gemv_t_acc(p.W.data.data(), C, din, grad_out.data.data(), grad_in.data.data());
    return grad_in;
}

/// Max-subtracted softmax.
template <class T>
Tensor<T> softmax(const Tensor<T>& logits) {
    Tensor<T> p(logits.shape);
    if (logits.size() == 0) return p;
    const T mx = *std::max_element(logits.data.begin(), logits.data.end());
    T sum = T(0);
    for (std::size_t i = 0; i < logits.size(); ++i) sum += (p[i] = std::exp(logits[i] - mx));
    for (auto& v : p.data) v /= sum;
    return p;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// -w_gold * ln(max(p_gold, 1e-12)).
template <class T>
T weighted_cross_entropy(const Tensor<T>& probs, std::size_t gold, double weight) {
    detail::require(gold < probs.size(), "weighted_cross_entropy: gold class out of range");
    const T p = std::max(probs[gold], static_cast<T>(kProbabilityFloor));
    return static_cast<T>(-weight) * std::log(p);
}

/// Gradient of the weighted loss with respect to the logits: w (p - onehot).
template <class T>
Tensor<T> weighted_cross_entropy_grad(const Tensor<T>& probs, std::size_t gold, double weight) {
    Tensor<T> g(probs.shape);
    for (std::size_t c = 0; c < probs.size(); ++c)
        g[c] = static_cast<T>(weight) * (probs[c] - (c == gold ? T(1) : T(0)));
    return g;
}

// ---------------------------------------------------------------- dropout

/// Inverted dropout; `scale` is empty in eval mode (identity).
template <class T>
struct DropoutMask {
    std::vector<T> scale;
};

template <class T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, Rng& rng, DropoutMask<T>* mask = nullptr) {
    detail::require(rate >= 0.0 && rate < 1.0, "dropout: rate must lie in [0,1)");
    if (mask) mask->scale.clear();
    if (mode == Mode::Eval || rate == 0.0) return x;
    const T keep = static_cast<T>(1.0 / (1.0 - rate));
    Tensor<T> out = x;
    out.grad.clear();
    std::vector<T> scale(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        scale[i] = rng.uniform() < rate ? T(0) : keep;
        out[i] = x[i] * scale[i];
    }
    if (mask) mask->scale = std::move(scale);
    return out;
}

template <class T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const DropoutMask<T>& mask) {
    if (mask.scale.empty()) return grad_out;
    Tensor<T> g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask.scale[i];
    return g;
}

// ---------------------------------------------------------------- Adam

template <class T>
struct AdamState {
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
    std::size_t step = 0;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam over every tensor in `params`, reading `grad`.
/// Tensors without a gradient slot are treated as having zero gradient.
template <class T>
void adam_step(std::span<Tensor<T>* const> params, AdamState<T>& state, double lr, const AdamConfig& cfg = {}) {
    if (state.m.empty()) {
        for (auto* p : params) {
            state.m.emplace_back(p->size(), T(0));
            state.v.emplace_back(p->size(), T(0));
        }
    }
    detail::require(state.m.size() == params.size(), "adam_step: optimizer state tracks " +
                                                          std::to_string(state.m.size()) + " tensors, got " +
                                                          std::to_string(params.size()));
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T>& p = *params[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        detail::require(m.size() == p.size(), "adam_step: state shape mismatch for tensor " + std::to_string(i));
        if (!p.has_grad()) continue;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const T g = p.grad[j];
            if (g == T(0) && m[j] == T(0) && v[j] == T(0)) continue;
            m[j] = b1 * m[j] + (T(1) - b1) * g;
            v[j] = b2 * v[j] + (T(1) - b2) * g * g;
            const double mhat = static_cast<double>(m[j]) / bc1;
            const double vhat = static_cast<double>(v[j]) / bc2;
            p.data[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
}

// ---------------------------------------------------------------- gradient check

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Central-difference verification. `loss(true)` must compute the loss and
/// accumulate analytic gradients into the tensors' grad slots; `loss(false)`
/// only computes the loss. Relative error is |a-n| / max(|a|, |n|, 1e-8).
template <class LossFn>
GradCheckReport grad_check(LossFn&& loss, std::span<const std::pair<std::string, Tensor<double>*>> params,
                           double delta = 1e-5) {
    for (auto& [name, t] : params) {
        t->ensure_grad();
        t->zero_grad();
    }
    double base = loss(true);
    if (!std::isfinite(base)) throw NumericError("grad_check: loss is not finite");
    GradCheckReport rep;
    for (auto& [name, t] : params) {
        const std::vector<double> analytic = t->grad;
        for (std::size_t i = 0; i < t->size(); ++i) {
            const double orig = t->data[i];
            t->data[i] = orig + delta;
            const double up = loss(false);
            t->data[i] = orig - delta;
            const double down = loss(false);
            t->data[i] = orig;
            if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(analytic[i]))
                throw NumericError("grad_check: non-finite value at " + name + "[" + std::to_string(i) + "]");
            const double numeric = (up - down) / (2.0 * delta);
            const double a = analytic[i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            ++rep.checked;
            if (rel > rep.max_rel_error) {
                rep.max_rel_error = rel;
                rep.worst_tensor = name;
                rep.worst_index = i;
                rep.analytic = a;
                rep.numeric = numeric;
            }
        }
    }
    return rep;
}

}  // namespace stancelab::nn
