#include "scarlab/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace scarlab::circuit {

namespace {

const Complex I(0.0, 1.0);

// Index with a zero bit inserted at `pos`.
inline std::size_t insert_zero(std::size_t x, int pos) {
  const std::size_t low = x & ((std::size_t{1} << pos) - 1);
  return ((x >> pos) << (pos + 1)) | low;
}

void check_qubit(const Eigen::VectorXcd& psi, int q) {
  require(q >= 0 && (std::size_t{1} << q) < static_cast<std::size_t>(psi.size()), ErrorCode::InvalidArgument,
          "qubit index out of range");
}

Mat4 pauli_product(const Mat2& p) { return on_pair(p, p); }

Mat4 rotation4(const Mat4& generator, double theta) {
  // generator squares to the identity
  return std::cos(0.5 * theta) * Mat4::Identity() - I * std::sin(0.5 * theta) * generator;
}

}  // namespace

Mat2 pauli_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 pauli_y() {
  Mat2 m;
  m << 0, -I, I, 0;
  return m;
}

Mat2 pauli_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 rx(double theta) { return std::cos(0.5 * theta) * Mat2::Identity() - I * std::sin(0.5 * theta) * pauli_x(); }
Mat2 ry(double theta) { return std::cos(0.5 * theta) * Mat2::Identity() - I * std::sin(0.5 * theta) * pauli_y(); }
Mat2 rz(double theta) { return std::cos(0.5 * theta) * Mat2::Identity() - I * std::sin(0.5 * theta) * pauli_z(); }
Mat4 rxx(double theta) { return rotation4(pauli_product(pauli_x()), theta); }
Mat4 ryy(double theta) { return rotation4(pauli_product(pauli_y()), theta); }
Mat4 rzz(double theta) { return rotation4(pauli_product(pauli_z()), theta); }

Mat4 on_pair(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i0 = 0; i0 < 2; ++i0)
      for (int j1 = 0; j1 < 2; ++j1)
        for (int j0 = 0; j0 < 2; ++j0) m(i0 + 2 * i1, j0 + 2 * j1) = a(i0, j0) * b(i1, j1);
  return m;
}

Mat4 controlled(const Mat2& u) {
  Mat4 m = Mat4::Zero();
  // control bit 0 set: local indices 1 (target 0) and 3 (target 1)
  m(0, 0) = 1.0;
  m(2, 2) = 1.0;
  m(1, 1) = u(0, 0);
  m(1, 3) = u(0, 1);
  m(3, 1) = u(1, 0);
  m(3, 3) = u(1, 1);
  return m;
}

void apply_1q(Eigen::VectorXcd& psi, int q, const Mat2& u) {
  check_qubit(psi, q);
  const std::size_t half = static_cast<std::size_t>(psi.size()) >> 1;
  const std::size_t stride = std::size_t{1} << q;
  Complex* d = psi.data();
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t x = 0; x < half; ++x) {
    const std::size_t i0 = insert_zero(x, q);
    const std::size_t i1 = i0 | stride;
    const Complex a = d[i0], b = d[i1];
    d[i0] = u00 * a + u01 * b;
    d[i1] = u10 * a + u11 * b;
  }
}

void apply_2q(Eigen::VectorXcd& psi, int q0, int q1, const Mat4& u) {
  check_qubit(psi, q0);
  check_qubit(psi, q1);
  require(q0 != q1, ErrorCode::InvalidArgument, "two-qubit gate on a single qubit");
  const int lo = std::min(q0, q1), hi = std::max(q0, q1);
  const std::size_t quarter = static_cast<std::size_t>(psi.size()) >> 2;
  const std::size_t m0 = std::size_t{1} << q0, m1 = std::size_t{1} << q1;
  Complex* d = psi.data();
  Complex c[16];
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c[4 * r + k] = u(r, k);
  for (std::size_t x = 0; x < quarter; ++x) {
    const std::size_t base = insert_zero(insert_zero(x, lo), hi);
    const std::size_t idx[4] = {base, base | m0, base | m1, base | m0 | m1};
    const Complex v0 = d[idx[0]], v1 = d[idx[1]], v2 = d[idx[2]], v3 = d[idx[3]];
    for (int r = 0; r < 4; ++r) d[idx[r]] = c[4 * r] * v0 + c[4 * r + 1] * v1 + c[4 * r + 2] * v2 + c[4 * r + 3] * v3;
  }
}

void apply_3q(Eigen::VectorXcd& psi, int q0, int q1, int q2, const Mat8& u) {
  check_qubit(psi, q0);
  check_qubit(psi, q1);
  check_qubit(psi, q2);
  require(q0 != q1 && q1 != q2 && q0 != q2, ErrorCode::InvalidArgument, "three-qubit gate needs distinct qubits");
  int sorted[3] = {q0, q1, q2};
  std::sort(sorted, sorted + 3);
  const std::size_t eighth = static_cast<std::size_t>(psi.size()) >> 3;
  const std::size_t m[3] = {std::size_t{1} << q0, std::size_t{1} << q1, std::size_t{1} << q2};
  Complex* d = psi.data();
  for (std::size_t x = 0; x < eighth; ++x) {
    const std::size_t base = insert_zero(insert_zero(insert_zero(x, sorted[0]), sorted[1]), sorted[2]);
    std::size_t idx[8];
    Complex v[8];
    for (int k = 0; k < 8; ++k) {
      idx[k] = base | ((k & 1) ? m[0] : 0) | ((k & 2) ? m[1] : 0) | ((k & 4) ? m[2] : 0);
      v[k] = d[idx[k]];
    }
    for (int r = 0; r < 8; ++r) {
      Complex acc = 0.0;
      for (int k = 0; k < 8; ++k) acc += u(r, k) * v[k];
      d[idx[r]] = acc;
    }
  }
}

Mat4 pair_overlap(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& phi, int q0, int q1) {
  const int lo = std::min(q0, q1), hi = std::max(q0, q1);
  const std::size_t quarter = static_cast<std::size_t>(phi.size()) >> 2;
  const std::size_t m0 = std::size_t{1} << q0, m1 = std::size_t{1} << q1;
  Complex acc[16] = {};
  const Complex* l = lambda.data();
  const Complex* p = phi.data();
  for (std::size_t x = 0; x < quarter; ++x) {
    const std::size_t base = insert_zero(insert_zero(x, lo), hi);
    const std::size_t idx[4] = {base, base | m0, base | m1, base | m0 | m1};
    for (int a = 0; a < 4; ++a) {
      const Complex la = std::conj(l[idx[a]]);
      if (la == Complex{}) continue;
      for (int b = 0; b < 4; ++b) acc[4 * a + b] += la * p[idx[b]];
    }
  }
  Mat4 m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = acc[4 * a + b];
  return m;
}

Mat2 site_overlap(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& phi, int q) {
  const std::size_t half = static_cast<std::size_t>(phi.size()) >> 1;
  const std::size_t stride = std::size_t{1} << q;
  Mat2 m = Mat2::Zero();
  for (std::size_t x = 0; x < half; ++x) {
    const std::size_t i0 = insert_zero(x, q);
    const std::size_t i1 = i0 | stride;
    const Complex l0 = std::conj(lambda[i0]), l1 = std::conj(lambda[i1]);
    m(0, 0) += l0 * phi[i0];
    m(0, 1) += l0 * phi[i1];
    m(1, 0) += l1 * phi[i0];
    m(1, 1) += l1 * phi[i1];
  }
  return m;
}

double probability_one(const Eigen::VectorXcd& psi, int q) {
  check_qubit(psi, q);
  const std::size_t mask = std::size_t{1} << q;
  double p = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i)
    if (i & mask) p += std::norm(psi[i]);
  return p;
}

int qubit_count(const Eigen::VectorXcd& psi) {
  const auto size = static_cast<std::size_t>(psi.size());
  require(size > 0 && std::has_single_bit(size), ErrorCode::DimensionMismatch, "register size is not a power of two");
  return std::countr_zero(size);
}

}  // namespace scarlab::circuit
