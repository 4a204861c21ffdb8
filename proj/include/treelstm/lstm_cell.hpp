#pragma once

// Vanilla LSTM cell without peepholes. Input weights carry the bias as their
// last column; recurrent weights carry none.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "treelstm/numeric.hpp"

namespace treelstm {

struct LstmParams {
  Matrix wz, wi, wf, wo;  // q x (m+1)
  Matrix rz, ri, rf, ro;  // q x q

  static LstmParams zeros(std::size_t hidden, std::size_t input) {
    LstmParams p;
    for (Matrix* w : p.input_weights()) *w = Matrix(hidden, input + 1);
    for (Matrix* r : p.recurrent_weights()) *r = Matrix(hidden, hidden);
    return p;
  }

  static LstmParams gaussian(Rng& rng, std::size_t hidden, std::size_t input, Real variance) {
    LstmParams p;
    for (Matrix* w : p.input_weights()) *w = gaussian_init(rng, hidden, input + 1, variance);
    for (Matrix* r : p.recurrent_weights()) *r = gaussian_init(rng, hidden, hidden, variance);
    return p;
  }

  std::size_t hidden_size() const noexcept { return wz.rows(); }
  std::size_t input_size() const noexcept { return wz.cols() == 0 ? 0 : wz.cols() - 1; }

  std::array<Matrix*, 4> input_weights() noexcept { return {&wz, &wi, &wf, &wo}; }
  std::array<Matrix*, 4> recurrent_weights() noexcept { return {&rz, &ri, &rf, &ro}; }

  /// All eight matrices in a fixed order (wz wi wf wo rz ri rf ro).
  std::array<Matrix*, 8> matrices() noexcept { return {&wz, &wi, &wf, &wo, &rz, &ri, &rf, &ro}; }
  std::array<const Matrix*, 8> matrices() const noexcept {
    return {&wz, &wi, &wf, &wo, &rz, &ri, &rf, &ro};
  }

  static constexpr std::array<const char*, 8> kMatrixNames = {"Wz", "Wi", "Wf", "Wo",
                                                              "Rz", "Ri", "Rf", "Ro"};

  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (const Matrix* m : matrices()) n += m->size();
    return n;
  }

  /// Throws DimensionError unless all eight matrices agree on (q, m).
  void validate() const {
    const std::size_t q = hidden_size();
    const std::size_t m = input_size();
    for (std::size_t k = 0; k < 8; ++k) {
      const Matrix& mat = *matrices()[k];
      const std::size_t cols = k < 4 ? m + 1 : q;
      if (mat.rows() != q || mat.cols() != cols) {
        throw DimensionError(std::string("LstmParams: ") + kMatrixNames[k] + " has shape " +
                             mat.shape() + ", expected " + Matrix::shape_string(q, cols));
      }
    }
  }

  friend bool operator==(const LstmParams&, const LstmParams&) = default;
};

struct LstmState {
  Vector c;
  Vector h;

  static LstmState zeros(std::size_t hidden) { return {Vector(hidden), Vector(hidden)}; }

  friend bool operator==(const LstmState&, const LstmState&) = default;
};

/// Everything the backward step needs from one forward step.
struct StepTrace {
  Vector x;
  Vector h_prev, c_prev;
  Vector z, i, f, o;
  Vector c, h;
};

namespace detail {

inline Vector gate_preactivation(const Matrix& w, const Matrix& r, std::span<const Real> x,
                                 const Vector& h_prev) {
  Vector pre = affine(w, x);
  matvec_accumulate(r, h_prev.span(), pre);
  return pre;
}

}  // namespace detail

inline StepTrace cell_forward(const LstmParams& p, std::span<const Real> x, const LstmState& s) {
  const std::size_t q = p.hidden_size();
  if (x.size() != p.input_size()) {
    throw DimensionError("cell_forward: input size " + std::to_string(x.size()) +
                         " but weights expect " + std::to_string(p.input_size()));
  }
  if (s.c.size() != q || s.h.size() != q) {
    throw DimensionError("cell_forward: state sizes (" + std::to_string(s.c.size()) + ", " +
                         std::to_string(s.h.size()) + ") but hidden size is " +
                         std::to_string(q));
  }
  StepTrace t;
  t.x = Vector(std::vector<Real>(x.begin(), x.end()));
  t.h_prev = s.h;
  t.c_prev = s.c;
  t.z = tanh(detail::gate_preactivation(p.wz, p.rz, x, s.h));
  t.i = sigmoid(detail::gate_preactivation(p.wi, p.ri, x, s.h));
  t.f = sigmoid(detail::gate_preactivation(p.wf, p.rf, x, s.h));
  t.o = sigmoid(detail::gate_preactivation(p.wo, p.ro, x, s.h));
  t.c = Vector(q);
  t.h = Vector(q);
  for (std::size_t j = 0; j < q; ++j) {
    t.c[j] = t.i[j] * t.z[j] + t.f[j] * s.c[j];
    t.h[j] = t.o[j] * std::tanh(t.c[j]);
  }
  return t;
}

inline StepTrace cell_forward(const LstmParams& p, const Vector& x, const LstmState& s) {
  return cell_forward(p, x.span(), s);
}

inline LstmState state_of(const StepTrace& t) { return {t.c, t.h}; }

struct CellBackward {
  Vector dx;
  Vector dh_prev;
  Vector dc_prev;
};

/// Backward through one traced step. Parameter gradients are added into `grads`,
/// which must have the shape of `p`.
inline CellBackward cell_backward(const LstmParams& p, const StepTrace& t,
                                  std::span<const Real> dh, std::span<const Real> dc,
                                  LstmParams& grads) {
  const std::size_t q = p.hidden_size();
  const std::size_t m = p.input_size();
  if (t.x.size() != m || t.h.size() != q || dh.size() != q || dc.size() != q) {
    throw DimensionError("cell_backward: trace/gradient shapes do not match params (q=" +
                         std::to_string(q) + ", m=" + std::to_string(m) + ")");
  }
  if (grads.hidden_size() != q || grads.input_size() != m) {
    throw DimensionError("cell_backward: gradient accumulator has wrong shape");
  }

  Vector dpz(q), dpi(q), dpf(q), dpo(q);
  CellBackward out{Vector(m), Vector(q), Vector(q)};
  for (std::size_t j = 0; j < q; ++j) {
    const Real tc = std::tanh(t.c[j]);
    const Real d_c = dc[j] + dh[j] * t.o[j] * (1.0 - tc * tc);
    dpo[j] = dh[j] * tc * t.o[j] * (1.0 - t.o[j]);
    dpi[j] = d_c * t.z[j] * t.i[j] * (1.0 - t.i[j]);
    dpz[j] = d_c * t.i[j] * (1.0 - t.z[j] * t.z[j]);
    dpf[j] = d_c * t.c_prev[j] * t.f[j] * (1.0 - t.f[j]);
    out.dc_prev[j] = d_c * t.f[j];
  }

  const std::array<const Vector*, 4> pre = {&dpz, &dpi, &dpf, &dpo};
  const std::array<const Matrix*, 4> w = {&p.wz, &p.wi, &p.wf, &p.wo};
  const std::array<const Matrix*, 4> r = {&p.rz, &p.ri, &p.rf, &p.ro};
  const auto gw = grads.input_weights();
  const auto gr = grads.recurrent_weights();
  for (std::size_t g = 0; g < 4; ++g) {
    const auto delta = pre[g]->span();
    outer_accumulate(*gw[g], delta, t.x.span(), true);
    outer_accumulate(*gr[g], delta, t.h_prev.span(), false);
    matvec_transpose_accumulate(*r[g], delta, out.dh_prev.span());
    // Input gradient skips the bias column.
    const Matrix& wg = *w[g];
    for (std::size_t row = 0; row < q; ++row) {
      const Real d = delta[row];
      for (std::size_t col = 0; col < m; ++col) out.dx[col] += wg(row, col) * d;
    }
  }
  return out;
}

}  // namespace treelstm
