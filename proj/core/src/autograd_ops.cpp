#include "mddr/autograd/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <utility>

#include "mddr/common/errors.hpp"
#include "mddr/objectives/losses.hpp"

namespace mddr::autograd {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

Variable make_op(Tensor value, std::vector<Variable> parents,
                 std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    bool need = false;
    if (grad_mode()) {
        for (const auto& p : parents) {
            if (p.defined() && p.node()->needs_grad) {
                need = true;
                break;
            }
        }
    }
    node->needs_grad = need;
    if (need) {
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.node());
        node->backward_fn = std::move(backward_fn);
    }
    return Variable::from_node(node);
}

void check_dims(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

// im2col / col2im with zero padding. `cols` is a row-major [C*K*K, ld]
// matrix; the image's patch grid lands in columns [col0, col0 + Hc*Wc).
struct ConvGeom {
    int C, H, W;   // image side
    int K, S, P;
    int Hc, Wc;    // patch grid side

    static ConvGeom make(int C, int H, int W, int K, int S, int P) {
        ConvGeom g{C, H, W, K, S, P, 0, 0};
        g.Hc = (H + 2 * P - K) / S + 1;
        g.Wc = (W + 2 * P - K) / S + 1;
        return g;
    }
};

void im2col(const float* img, const ConvGeom& g, float* cols, int64_t ld, int64_t col0) {
    for (int c = 0; c < g.C; ++c) {
        const float* plane = img + static_cast<int64_t>(c) * g.H * g.W;
        for (int ki = 0; ki < g.K; ++ki) {
            for (int kj = 0; kj < g.K; ++kj) {
                const int64_t row = (static_cast<int64_t>(c) * g.K + ki) * g.K + kj;
                float* dst = cols + row * ld + col0;
                for (int oh = 0; oh < g.Hc; ++oh) {
                    const int ih = oh * g.S - g.P + ki;
                    float* drow = dst + static_cast<int64_t>(oh) * g.Wc;
                    if (ih < 0 || ih >= g.H) {
                        for (int ow = 0; ow < g.Wc; ++ow) drow[ow] = 0.0f;
                        continue;
                    }
                    const float* srow = plane + static_cast<int64_t>(ih) * g.W;
                    for (int ow = 0; ow < g.Wc; ++ow) {
                        const int iw = ow * g.S - g.P + kj;
                        drow[ow] = (iw >= 0 && iw < g.W) ? srow[iw] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im_add(const float* cols, const ConvGeom& g, float* img, int64_t ld, int64_t col0) {
    for (int c = 0; c < g.C; ++c) {
        float* plane = img + static_cast<int64_t>(c) * g.H * g.W;
        for (int ki = 0; ki < g.K; ++ki) {
            for (int kj = 0; kj < g.K; ++kj) {
                const int64_t row = (static_cast<int64_t>(c) * g.K + ki) * g.K + kj;
                const float* src = cols + row * ld + col0;
                for (int oh = 0; oh < g.Hc; ++oh) {
                    const int ih = oh * g.S - g.P + ki;
                    if (ih < 0 || ih >= g.H) continue;
                    const float* srow = src + static_cast<int64_t>(oh) * g.Wc;
                    float* drow = plane + static_cast<int64_t>(ih) * g.W;
                    for (int ow = 0; ow < g.Wc; ++ow) {
                        const int iw = ow * g.S - g.P + kj;
                        if (iw >= 0 && iw < g.W) drow[iw] += srow[ow];
                    }
                }
            }
        }
    }
}

std::vector<double> to_double(const Tensor& t) {
    std::vector<double> v(static_cast<size_t>(t.numel()));
    for (int64_t i = 0; i < t.numel(); ++i) v[static_cast<size_t>(i)] = t[i];
    return v;
}

// Accumulate a double gradient into a parent, scaled by the upstream scalar.
void add_scaled_into(Node& parent, const std::vector<double>& g, double scale) {
    parent.ensure_grad();
    float* dst = parent.grad.data();
    for (size_t i = 0; i < g.size(); ++i) {
        dst[i] += static_cast<float>(g[i] * scale);
    }
}

}  // namespace

Variable linear(const Variable& x, const Variable& w, const Variable& b) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    check_dims(xv.ndim() == 2 && wv.ndim() == 2 && bv.ndim() == 1,
               "linear: expected x [B,I], w [O,I], b [O]");
    const int B = xv.dim(0), I = xv.dim(1), O = wv.dim(0);
    check_dims(wv.dim(1) == I, "linear: weight in-features " + std::to_string(wv.dim(1)) +
                                   " != input features " + std::to_string(I));
    check_dims(bv.dim(0) == O, "linear: bias size mismatch");

    Tensor out({B, O});
    {
        CMapM X(xv.data(), B, I), W(wv.data(), O, I);
        MapM Y(out.data(), B, O);
        Y.noalias() = X * W.transpose();
        for (int i = 0; i < B; ++i) {
            for (int o = 0; o < O; ++o) out[static_cast<int64_t>(i) * O + o] += bv[o];
        }
    }

    return make_op(std::move(out), {x, w, b}, [B, I, O](Node& n) {
        Node& xp = *n.parents[0];
        Node& wp = *n.parents[1];
        Node& bp = *n.parents[2];
        CMapM dY(n.grad.data(), B, O);
        if (xp.needs_grad) {
            xp.ensure_grad();
            MapM dX(xp.grad.data(), B, I);
            CMapM W(wp.value.data(), O, I);
            dX.noalias() += dY * W;
        }
        if (wp.needs_grad) {
            wp.ensure_grad();
            MapM dW(wp.grad.data(), O, I);
            CMapM X(xp.value.data(), B, I);
            dW.noalias() += dY.transpose() * X;
        }
        if (bp.needs_grad) {
            bp.ensure_grad();
            for (int o = 0; o < O; ++o) {
                float s = 0.0f;
                for (int i = 0; i < B; ++i) s += dY(i, o);
                bp.grad[o] += s;
            }
        }
    });
}

Variable conv2d(const Variable& x, const Variable& w, const Variable& b,
                int stride, int pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    check_dims(xv.ndim() == 4 && wv.ndim() == 4, "conv2d: expected x [B,C,H,W], w [O,C,k,k]");
    const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    const int O = wv.dim(0), K = wv.dim(2);
    check_dims(wv.dim(1) == C, "conv2d: channel mismatch (input " + std::to_string(C) +
                                   ", weight " + std::to_string(wv.dim(1)) + ")");
    check_dims(wv.dim(3) == K && bv.numel() == O, "conv2d: weight/bias shape mismatch");
    check_dims(H + 2 * pad >= K && W + 2 * pad >= K, "conv2d: input smaller than kernel");

    const ConvGeom g = ConvGeom::make(C, H, W, K, stride, pad);
    const int64_t S = static_cast<int64_t>(g.Hc) * g.Wc;
    const int64_t CKK = static_cast<int64_t>(C) * K * K;

    auto cols = std::make_shared<std::vector<float>>(static_cast<size_t>(CKK * B * S));
    for (int bi = 0; bi < B; ++bi) {
        im2col(xv.data() + xv.offset4(bi, 0, 0, 0), g, cols->data(), B * S, bi * S);
    }

    std::vector<float> y(static_cast<size_t>(O) * B * S);
    {
        CMapM Wm(wv.data(), O, CKK), Cm(cols->data(), CKK, B * S);
        MapM Ym(y.data(), O, B * S);
        Ym.noalias() = Wm * Cm;
    }

    Tensor out({B, O, g.Hc, g.Wc});
    for (int bi = 0; bi < B; ++bi) {
        for (int o = 0; o < O; ++o) {
            const float* src = y.data() + static_cast<int64_t>(o) * B * S + bi * S;
            float* dst = out.data() + out.offset4(bi, o, 0, 0);
            const float bias = bv[o];
            for (int64_t s = 0; s < S; ++s) dst[s] = src[s] + bias;
        }
    }

    const bool keep_cols = grad_mode() && (x.needs_grad() || w.needs_grad());
    if (!keep_cols) cols.reset();

    return make_op(std::move(out), {x, w, b}, [B, O, S, CKK, g, cols](Node& n) {
        Node& xp = *n.parents[0];
        Node& wp = *n.parents[1];
        Node& bp = *n.parents[2];

        std::vector<float> dy(static_cast<size_t>(O) * B * S);
        for (int bi = 0; bi < B; ++bi) {
            for (int o = 0; o < O; ++o) {
                const float* src = n.grad.data() + n.grad.offset4(bi, o, 0, 0);
                float* dst = dy.data() + static_cast<int64_t>(o) * B * S + bi * S;
                for (int64_t s = 0; s < S; ++s) dst[s] = src[s];
            }
        }
        CMapM dY(dy.data(), O, B * S);

        if (bp.needs_grad) {
            bp.ensure_grad();
            for (int o = 0; o < O; ++o) bp.grad[o] += dY.row(o).sum();
        }
        if (wp.needs_grad && cols) {
            wp.ensure_grad();
            MapM dW(wp.grad.data(), O, CKK);
            CMapM Cm(cols->data(), CKK, B * S);
            dW.noalias() += dY * Cm.transpose();
        }
        if (xp.needs_grad) {
            xp.ensure_grad();
            std::vector<float> dcols(static_cast<size_t>(CKK) * B * S);
            CMapM Wm(wp.value.data(), O, CKK);
            MapM dC(dcols.data(), CKK, B * S);
            dC.noalias() = Wm.transpose() * dY;
            for (int bi = 0; bi < B; ++bi) {
                col2im_add(dcols.data(), g, xp.grad.data() + xp.grad.offset4(bi, 0, 0, 0),
                           B * S, bi * S);
            }
        }
    });
}

Variable conv_transpose2d(const Variable& x, const Variable& w, const Variable& b,
                          int stride, int pad, int out_pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    check_dims(xv.ndim() == 4 && wv.ndim() == 4,
               "conv_transpose2d: expected x [B,C,Hi,Wi], w [C,O,k,k]");
    const int B = xv.dim(0), C = xv.dim(1), Hi = xv.dim(2), Wi = xv.dim(3);
    const int O = wv.dim(1), K = wv.dim(2);
    check_dims(wv.dim(0) == C, "conv_transpose2d: channel mismatch");
    check_dims(wv.dim(3) == K && bv.numel() == O, "conv_transpose2d: weight/bias shape mismatch");

    const int Ho = (Hi - 1) * stride - 2 * pad + K + out_pad;
    const int Wo = (Wi - 1) * stride - 2 * pad + K + out_pad;
    check_dims(Ho > 0 && Wo > 0, "conv_transpose2d: non-positive output size");

    // The scatter geometry is the adjoint of a conv2d whose input is the
    // conv_transpose output; its patch grid must be exactly [Hi, Wi].
    const ConvGeom g = ConvGeom::make(O, Ho, Wo, K, stride, pad);
    check_dims(g.Hc == Hi && g.Wc == Wi,
               "conv_transpose2d: output geometry inconsistent with stride/pad/out_pad");

    const int64_t S = static_cast<int64_t>(Hi) * Wi;
    const int64_t OKK = static_cast<int64_t>(O) * K * K;

    // Gather x into a [C, B*S] matrix so one GEMM covers the batch.
    auto xg = std::make_shared<std::vector<float>>(static_cast<size_t>(C) * B * S);
    for (int bi = 0; bi < B; ++bi) {
        for (int c = 0; c < C; ++c) {
            const float* src = xv.data() + xv.offset4(bi, c, 0, 0);
            float* dst = xg->data() + static_cast<int64_t>(c) * B * S + bi * S;
            for (int64_t s = 0; s < S; ++s) dst[s] = src[s];
        }
    }

    std::vector<float> colsy(static_cast<size_t>(OKK) * B * S);
    {
        CMapM Wm(wv.data(), C, OKK), Xg(xg->data(), C, B * S);
        MapM Cy(colsy.data(), OKK, B * S);
        Cy.noalias() = Wm.transpose() * Xg;
    }

    Tensor out({B, O, Ho, Wo});
    for (int bi = 0; bi < B; ++bi) {
        col2im_add(colsy.data(), g, out.data() + out.offset4(bi, 0, 0, 0), B * S, bi * S);
    }
    for (int bi = 0; bi < B; ++bi) {
        for (int o = 0; o < O; ++o) {
            float* dst = out.data() + out.offset4(bi, o, 0, 0);
            const float bias = bv[o];
            for (int64_t s = 0; s < static_cast<int64_t>(Ho) * Wo; ++s) dst[s] += bias;
        }
    }

    const bool keep_xg = grad_mode() && w.needs_grad();
    if (!keep_xg) xg.reset();

    return make_op(std::move(out), {x, w, b}, [B, C, O, S, OKK, g, xg](Node& n) {
        Node& xp = *n.parents[0];
        Node& wp = *n.parents[1];
        Node& bp = *n.parents[2];

        if (bp.needs_grad) {
            bp.ensure_grad();
            const int64_t plane = static_cast<int64_t>(g.H) * g.W;
            for (int bi = 0; bi < B; ++bi) {
                for (int o = 0; o < O; ++o) {
                    const float* src = n.grad.data() + n.grad.offset4(bi, o, 0, 0);
                    float s = 0.0f;
                    for (int64_t i = 0; i < plane; ++i) s += src[i];
                    bp.grad[o] += s;
                }
            }
        }

        const bool need_cols = xp.needs_grad || wp.needs_grad;
        if (!need_cols) return;

        std::vector<float> dcolsy(static_cast<size_t>(OKK) * B * S);
        for (int bi = 0; bi < B; ++bi) {
            im2col(n.grad.data() + n.grad.offset4(bi, 0, 0, 0), g, dcolsy.data(), B * S,
                   bi * S);
        }
        CMapM dCy(dcolsy.data(), OKK, B * S);

        if (wp.needs_grad && xg) {
            wp.ensure_grad();
            MapM dW(wp.grad.data(), C, OKK);
            CMapM Xg(xg->data(), C, B * S);
            dW.noalias() += Xg * dCy.transpose();
        }
        if (xp.needs_grad) {
            xp.ensure_grad();
            std::vector<float> dxg(static_cast<size_t>(C) * B * S);
            CMapM Wm(wp.value.data(), C, OKK);
            MapM dXg(dxg.data(), C, B * S);
            dXg.noalias() = Wm * dCy;
            for (int bi = 0; bi < B; ++bi) {
                for (int c = 0; c < C; ++c) {
                    const float* src = dxg.data() + static_cast<int64_t>(c) * B * S + bi * S;
                    float* dst = xp.grad.data() + xp.grad.offset4(bi, c, 0, 0);
                    for (int64_t s = 0; s < S; ++s) dst[s] += src[s];
                }
            }
        }
    });
}

Variable batch_norm2d(const Variable& x, const Variable& gamma, const Variable& beta,
                      Variable& running_mean, Variable& running_var,
                      bool training, double momentum, double eps) {
    const Tensor& xv = x.value();
    check_dims(xv.ndim() == 4, "batch_norm2d: expected [B,C,H,W]");
    const int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    check_dims(gamma.value().numel() == C && beta.value().numel() == C &&
                   running_mean.value().numel() == C && running_var.value().numel() == C,
               "batch_norm2d: per-channel parameter size mismatch");
    const int64_t N = static_cast<int64_t>(B) * H * W;
    const int64_t plane = static_cast<int64_t>(H) * W;

    auto mean = std::make_shared<std::vector<float>>(static_cast<size_t>(C));
    auto invstd = std::make_shared<std::vector<float>>(static_cast<size_t>(C));

    if (training) {
        for (int c = 0; c < C; ++c) {
            double s = 0.0;
            for (int bi = 0; bi < B; ++bi) {
                const float* p = xv.data() + xv.offset4(bi, c, 0, 0);
                for (int64_t i = 0; i < plane; ++i) s += p[i];
            }
            const double mu = s / static_cast<double>(N);
            double v = 0.0;
            for (int bi = 0; bi < B; ++bi) {
                const float* p = xv.data() + xv.offset4(bi, c, 0, 0);
                for (int64_t i = 0; i < plane; ++i) {
                    const double d = p[i] - mu;
                    v += d * d;
                }
            }
            const double var = v / static_cast<double>(N);
            (*mean)[static_cast<size_t>(c)] = static_cast<float>(mu);
            (*invstd)[static_cast<size_t>(c)] = static_cast<float>(1.0 / std::sqrt(var + eps));

            const double unbiased = N > 1 ? v / static_cast<double>(N - 1) : var;
            float& rm = running_mean.mutable_value()[c];
            float& rv = running_var.mutable_value()[c];
            rm = static_cast<float>((1.0 - momentum) * rm + momentum * mu);
            rv = static_cast<float>((1.0 - momentum) * rv + momentum * unbiased);
        }
    } else {
        for (int c = 0; c < C; ++c) {
            (*mean)[static_cast<size_t>(c)] = running_mean.value()[c];
            (*invstd)[static_cast<size_t>(c)] =
                static_cast<float>(1.0 / std::sqrt(static_cast<double>(running_var.value()[c]) + eps));
        }
    }

    Tensor out(xv.dims());
    for (int bi = 0; bi < B; ++bi) {
        for (int c = 0; c < C; ++c) {
            const float* p = xv.data() + xv.offset4(bi, c, 0, 0);
            float* q = out.data() + out.offset4(bi, c, 0, 0);
            const float mu = (*mean)[static_cast<size_t>(c)];
            const float is = (*invstd)[static_cast<size_t>(c)];
            const float gm = gamma.value()[c];
            const float bt = beta.value()[c];
            for (int64_t i = 0; i < plane; ++i) q[i] = (p[i] - mu) * is * gm + bt;
        }
    }

    return make_op(std::move(out), {x, gamma, beta},
                   [B, C, N, plane, mean, invstd, training](Node& n) {
                       Node& xp = *n.parents[0];
                       Node& gp = *n.parents[1];
                       Node& bp = *n.parents[2];

                       for (int c = 0; c < C; ++c) {
                           const float mu = (*mean)[static_cast<size_t>(c)];
                           const float is = (*invstd)[static_cast<size_t>(c)];
                           const float gm = gp.value[c];
                           double s1 = 0.0, s2 = 0.0;
                           for (int bi = 0; bi < B; ++bi) {
                               const float* dy = n.grad.data() + n.grad.offset4(bi, c, 0, 0);
                               const float* xr = xp.value.data() + xp.value.offset4(bi, c, 0, 0);
                               for (int64_t i = 0; i < plane; ++i) {
                                   s1 += dy[i];
                                   s2 += static_cast<double>(dy[i]) * (xr[i] - mu) * is;
                               }
                           }
                           if (gp.needs_grad) {
                               gp.ensure_grad();
                               gp.grad[c] += static_cast<float>(s2);
                           }
                           if (bp.needs_grad) {
                               bp.ensure_grad();
                               bp.grad[c] += static_cast<float>(s1);
                           }
                           if (xp.needs_grad) {
                               xp.ensure_grad();
                               const double m1 = s1 / static_cast<double>(N);
                               const double m2 = s2 / static_cast<double>(N);
                               for (int bi = 0; bi < B; ++bi) {
                                   const float* dy = n.grad.data() + n.grad.offset4(bi, c, 0, 0);
                                   const float* xr = xp.value.data() + xp.value.offset4(bi, c, 0, 0);
                                   float* dx = xp.grad.data() + xp.grad.offset4(bi, c, 0, 0);
                                   if (training) {
                                       for (int64_t i = 0; i < plane; ++i) {
                                           const double xhat = (xr[i] - mu) * is;
                                           dx[i] += static_cast<float>(gm * is *
                                                                       (dy[i] - m1 - xhat * m2));
                                       }
                                   } else {
                                       for (int64_t i = 0; i < plane; ++i) {
                                           dx[i] += static_cast<float>(static_cast<double>(gm) * is * dy[i]);
                                       }
                                   }
                               }
                           }
                       }
                   });
}

Variable relu(const Variable& x) {
    const Tensor& xv = x.value();
    Tensor out(xv.dims());
    for (int64_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] > 0.0f ? xv[i] : 0.0f;
    return make_op(std::move(out), {x}, [](Node& n) {
        Node& xp = *n.parents[0];
        if (!xp.needs_grad) return;
        xp.ensure_grad();
        for (int64_t i = 0; i < n.grad.numel(); ++i) {
            if (xp.value[i] > 0.0f) xp.grad[i] += n.grad[i];
        }
    });
}

Variable sigmoid(const Variable& x) {
    const Tensor& xv = x.value();
    Tensor out(xv.dims());
    for (int64_t i = 0; i < xv.numel(); ++i) {
        out[i] = static_cast<float>(objectives::stable_sigmoid(xv[i]));
    }
    return make_op(std::move(out), {x}, [](Node& n) {
        Node& xp = *n.parents[0];
        if (!xp.needs_grad) return;
        xp.ensure_grad();
        for (int64_t i = 0; i < n.grad.numel(); ++i) {
            const float y = n.value[i];
            xp.grad[i] += n.grad[i] * y * (1.0f - y);
        }
    });
}

Variable add(const Variable& a, const Variable& b) {
    check_dims(a.value().same_dims(b.value()), "add: dims mismatch " + a.value().dims_str() +
                                                   " vs " + b.value().dims_str());
    Tensor out(a.value().dims());
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        for (int pi = 0; pi < 2; ++pi) {
            Node& p = *n.parents[static_cast<size_t>(pi)];
            if (!p.needs_grad) continue;
            p.ensure_grad();
            for (int64_t i = 0; i < n.grad.numel(); ++i) p.grad[i] += n.grad[i];
        }
    });
}

Variable reshape(const Variable& x, std::vector<int> dims) {
    Tensor out = x.value().reshaped(std::move(dims));
    return make_op(std::move(out), {x}, [](Node& n) {
        Node& xp = *n.parents[0];
        if (!xp.needs_grad) return;
        xp.ensure_grad();
        for (int64_t i = 0; i < n.grad.numel(); ++i) xp.grad[i] += n.grad[i];
    });
}

Variable concat_features(const std::vector<Variable>& parts) {
    check_dims(!parts.empty(), "concat_features: no parts");
    const int B = parts[0].value().dim(0);
    int total = 0;
    std::vector<int> widths;
    for (const auto& p : parts) {
        check_dims(p.value().ndim() == 2 && p.value().dim(0) == B,
                   "concat_features: parts must be [B,F] with equal B");
        widths.push_back(p.value().dim(1));
        total += p.value().dim(1);
    }
    Tensor out({B, total});
    int off = 0;
    for (size_t pi = 0; pi < parts.size(); ++pi) {
        const Tensor& pv = parts[pi].value();
        const int F = widths[pi];
        for (int i = 0; i < B; ++i) {
            const float* src = pv.data() + static_cast<int64_t>(i) * F;
            float* dst = out.data() + static_cast<int64_t>(i) * total + off;
            for (int f = 0; f < F; ++f) dst[f] = src[f];
        }
        off += F;
    }
    return make_op(std::move(out), parts, [B, total, widths](Node& n) {
        int off = 0;
        for (size_t pi = 0; pi < n.parents.size(); ++pi) {
            Node& p = *n.parents[pi];
            const int F = widths[pi];
            if (p.needs_grad) {
                p.ensure_grad();
                for (int i = 0; i < B; ++i) {
                    const float* src = n.grad.data() + static_cast<int64_t>(i) * total + off;
                    float* dst = p.grad.data() + static_cast<int64_t>(i) * F;
                    for (int f = 0; f < F; ++f) dst[f] += src[f];
                }
            }
            off += F;
        }
    });
}

Variable global_avg_pool(const Variable& x) {
    const Tensor& xv = x.value();
    check_dims(xv.ndim() == 4, "global_avg_pool: expected [B,C,H,W]");
    const int B = xv.dim(0), C = xv.dim(1);
    const int64_t plane = static_cast<int64_t>(xv.dim(2)) * xv.dim(3);
    Tensor out({B, C});
    for (int bi = 0; bi < B; ++bi) {
        for (int c = 0; c < C; ++c) {
            const float* p = xv.data() + xv.offset4(bi, c, 0, 0);
            double s = 0.0;
            for (int64_t i = 0; i < plane; ++i) s += p[i];
            out[static_cast<int64_t>(bi) * C + c] = static_cast<float>(s / static_cast<double>(plane));
        }
    }
    return make_op(std::move(out), {x}, [B, C, plane](Node& n) {
        Node& xp = *n.parents[0];
        if (!xp.needs_grad) return;
        xp.ensure_grad();
        const float inv = 1.0f / static_cast<float>(plane);
        for (int bi = 0; bi < B; ++bi) {
            for (int c = 0; c < C; ++c) {
                const float g = n.grad[static_cast<int64_t>(bi) * C + c] * inv;
                float* dst = xp.grad.data() + xp.grad.offset4(bi, c, 0, 0);
                for (int64_t i = 0; i < plane; ++i) dst[i] += g;
            }
        }
    });
}

Variable add_scaled(const Variable& a, const Variable& b, double alpha) {
    check_dims(a.value().numel() == 1 && b.value().numel() == 1,
               "add_scaled: expects scalar operands");
    Tensor out({1});
    out[0] = static_cast<float>(static_cast<double>(a.value()[0]) +
                                alpha * static_cast<double>(b.value()[0]));
    return make_op(std::move(out), {a, b}, [alpha](Node& n) {
        Node& ap = *n.parents[0];
        Node& bp = *n.parents[1];
        if (ap.needs_grad) {
            ap.ensure_grad();
            ap.grad[0] += n.grad[0];
        }
        if (bp.needs_grad) {
            bp.ensure_grad();
            bp.grad[0] += static_cast<float>(alpha * n.grad[0]);
        }
    });
}

namespace {

Variable scalar_loss(Tensor value, std::vector<Variable> parents,
                     std::function<void(Node&, double)> apply_grads) {
    return make_op(std::move(value), std::move(parents),
                   [apply_grads = std::move(apply_grads)](Node& n) {
                       apply_grads(n, static_cast<double>(n.grad[0]));
                   });
}

}  // namespace

Variable bce_with_logits(const Variable& logits, const std::vector<int>& labels) {
    const Tensor& lv = logits.value();
    check_dims(lv.numel() == static_cast<int64_t>(labels.size()),
               "bce_with_logits: logits/labels length mismatch");
    auto l = to_double(lv);
    auto g = std::make_shared<std::vector<double>>(l.size());
    const auto loss = objectives::binary_ce_grad(l, labels, *g);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)), {logits},
                       [g](Node& n, double up) {
                           Node& p = *n.parents[0];
                           if (p.needs_grad) add_scaled_into(p, *g, up);
                       });
}

Variable softmax_ce(const Variable& logits, const std::vector<int>& labels) {
    const Tensor& lv = logits.value();
    check_dims(lv.ndim() == 2 && lv.dim(0) == static_cast<int>(labels.size()),
               "softmax_ce: expected logits [B,K] matching labels");
    auto l = to_double(lv);
    auto g = std::make_shared<std::vector<double>>(l.size());
    const auto loss = objectives::categorical_ce_grad(l, labels, lv.dim(1), *g);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)), {logits},
                       [g](Node& n, double up) {
                           Node& p = *n.parents[0];
                           if (p.needs_grad) add_scaled_into(p, *g, up);
                       });
}

Variable gan_d_loss(const Variable& real_logits, const Variable& fake_logits) {
    auto r = to_double(real_logits.value());
    auto f = to_double(fake_logits.value());
    auto gr = std::make_shared<std::vector<double>>(r.size());
    auto gf = std::make_shared<std::vector<double>>(f.size());
    const auto loss = objectives::gan_loss_discriminator_grad(r, f, *gr, *gf);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)),
                       {real_logits, fake_logits}, [gr, gf](Node& n, double up) {
                           if (n.parents[0]->needs_grad) add_scaled_into(*n.parents[0], *gr, up);
                           if (n.parents[1]->needs_grad) add_scaled_into(*n.parents[1], *gf, up);
                       });
}

Variable gan_g_loss(const Variable& fake_logits) {
    auto f = to_double(fake_logits.value());
    auto gf = std::make_shared<std::vector<double>>(f.size());
    const auto loss = objectives::gan_loss_generator_grad(f, *gf);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)), {fake_logits},
                       [gf](Node& n, double up) {
                           if (n.parents[0]->needs_grad) add_scaled_into(*n.parents[0], *gf, up);
                       });
}

Variable aux_class_loss(const Variable& cls_real, const std::vector<int>& labels_real,
                        const Variable& cls_fake, const std::vector<int>& labels_fake) {
    const bool has_real = cls_real.defined();
    const bool has_fake = cls_fake.defined();
    check_dims(has_real || has_fake, "aux_class_loss: both sides undefined");
    const int K = has_real ? cls_real.value().dim(1) : cls_fake.value().dim(1);
    if (has_real && has_fake) {
        check_dims(cls_real.value().dim(1) == cls_fake.value().dim(1),
                   "aux_class_loss: class count mismatch between real and fake logits");
    }

    std::vector<double> lr = has_real ? to_double(cls_real.value()) : std::vector<double>{};
    std::vector<double> lf = has_fake ? to_double(cls_fake.value()) : std::vector<double>{};
    auto gr = std::make_shared<std::vector<double>>(lr.size());
    auto gf = std::make_shared<std::vector<double>>(lf.size());
    const auto loss = objectives::aux_class_loss_grad(
        lr, labels_real, lf, labels_fake, K, *gr, *gf);

    std::vector<Variable> parents;
    if (has_real) parents.push_back(cls_real);
    if (has_fake) parents.push_back(cls_fake);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)), std::move(parents),
                       [gr, gf, has_real](Node& n, double up) {
                           size_t pi = 0;
                           if (has_real) {
                               if (n.parents[pi]->needs_grad) add_scaled_into(*n.parents[pi], *gr, up);
                               ++pi;
                           }
                           if (pi < n.parents.size()) {
                               if (n.parents[pi]->needs_grad) add_scaled_into(*n.parents[pi], *gf, up);
                           }
                       });
}

Variable l1_loss(const Variable& recon, const Tensor& target) {
    const Tensor& rv = recon.value();
    check_dims(rv.same_dims(target), "l1_loss: recon dims " + rv.dims_str() +
                                         " != target dims " + target.dims_str());
    auto r = to_double(rv);
    auto t = to_double(target);
    auto gr = std::make_shared<std::vector<double>>(r.size());
    const auto loss =
        objectives::l1_reconstruction_grad(t, r, rv.dim(0), {}, *gr);
    return scalar_loss(Tensor::scalar(static_cast<float>(loss.value)), {recon},
                       [gr](Node& n, double up) {
                           if (n.parents[0]->needs_grad) add_scaled_into(*n.parents[0], *gr, up);
                       });
}

Tensor softmax_rows(const Tensor& logits) {
    if (logits.ndim() != 2) throw ShapeError("softmax_rows: expected [B,K]");
    const int B = logits.dim(0), K = logits.dim(1);
    Tensor out({B, K});
    for (int i = 0; i < B; ++i) {
        const float* row = logits.data() + static_cast<int64_t>(i) * K;
        double m = row[0];
        for (int k = 1; k < K; ++k) m = std::max(m, static_cast<double>(row[k]));
        double z = 0.0;
        for (int k = 0; k < K; ++k) z += std::exp(row[k] - m);
        float* orow = out.data() + static_cast<int64_t>(i) * K;
        for (int k = 0; k < K; ++k) {
            orow[k] = static_cast<float>(std::exp(row[k] - m) / z);
        }
    }
    return out;
}

}  // namespace mddr::autograd
